#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "boltshare/joint_model.hpp"

using namespace boltshare;

namespace {

// Independent transcription of the stiffness relations in SI units (Pa, m, N),
// used as the arithmetic oracle. Results are converted back to N/mm.
struct OracleResult {
  double plate, ratio, k1, k2, k4;
};

OracleResult oracle(const JointConfig& c) {
  const double pi = std::numbers::pi;
  const double t = c.geometry.thickness_mm * 1e-3;
  const double d = c.geometry.bolt_diameter_mm * 1e-3;
  const double Phi = c.geometry.head_diameter_mm * 1e-3;
  const double w = c.geometry.width_mm * 1e-3;
  const double lp = c.geometry.pitch_mm * 1e-3;
  const double Epx = c.laminate.Ex_GPa * 1e9, Epy = c.laminate.Ey_GPa * 1e9;
  const double Gp = c.laminate.G_GPa * 1e9;
  const double Eb = c.bolt.E_GPa * 1e9, Gb = c.bolt.G_GPa * 1e9, mub = c.bolt.poisson;
  const double beta = c.friction.bending_fraction;

  const double Ap = w * t, Ab = pi * d * d / 4, A0 = pi * (Phi * Phi - d * d) / 4;
  const double Ib = pi * std::pow(d, 4) / 64, Ip = w * std::pow(t, 3) / 12;
  const double R = (64 * t * t / (3 * d * d * (1 + mub)) + 2.4) * A0 * Gp / (Ab * Gb) + 1;
  const double bend = (4 * lp - 3 * Phi) * t * t / (32 * Epx * Ip);
  const double c1 = (12 * t / (5 * Ab * Gb) + 8 * std::pow(t, 3) / (3 * Eb * Ib) +
                     (3 - R) * t / (4 * A0 * Gp)) / (1 + R) + bend;
  const double c2 = 12 * t / (5 * Ab * Gb) + 8 * std::pow(t, 3) / (3 * Eb * Ib) +
                    3 * t / (4 * A0 * Gp) + bend;
  const double c4 = 4 * t / (3 * Gp * Ap) + (4 / (t * Eb) + 2 / (t * std::sqrt(Epx * Epy))) * (1 + 3 * beta);
  return {Epx * Ap / lp / 1e3, R, 1 / c1 / 1e3, 1 / c2 / 1e3, 1 / c4 / 1e3};
}

JointConfig random_config(std::mt19937_64& rng) {
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  JointConfig c;
  c.geometry.bolt_diameter_mm = U(4, 12);
  c.geometry.head_diameter_mm = c.geometry.bolt_diameter_mm * U(1.3, 2.0);
  c.geometry.thickness_mm = U(1.5, 6);
  c.geometry.width_mm = c.geometry.bolt_diameter_mm * U(2.0, 5.0);
  c.geometry.pitch_mm = c.geometry.head_diameter_mm * U(3.0, 6.0);
  c.laminate.Ex_GPa = U(30, 150);
  c.laminate.Ey_GPa = U(8, 150);
  c.laminate.G_GPa = U(2, 10);
  c.bolt.E_GPa = U(70, 210);
  c.bolt.G_GPa = U(25, 80);
  c.bolt.poisson = U(0.2, 0.4);
  c.friction.bending_fraction = U(0.0, 0.5);
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(PlateStiffness, ReferenceJointValue) {
  JointConfig c;
  EXPECT_NEAR(plate_stiffness(c.geometry, c.laminate), 71600.0, 1e-9);
}

TEST(PlateStiffness, DoublingPitchHalves) {
  JointConfig c;
  const double k = plate_stiffness(c.geometry, c.laminate);
  c.geometry.pitch_mm *= 2;
  EXPECT_DOUBLE_EQ(plate_stiffness(c.geometry, c.laminate), k / 2);
}

TEST(Geometry, DegenerateInputsRejected) {
  JointGeometry g;
  g.width_mm = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.thickness_mm = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.head_diameter_mm = g.bolt_diameter_mm;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.n_bolts = 1;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  BoltProps b;
  b.poisson = 0.5;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  FrictionConstants f;
  f.bending_fraction = 1.0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(InterfaceRatio, ReferenceJointValue) {
  JointConfig c;
  // frozen from a 30-digit evaluation in SI units
  EXPECT_NEAR(interface_ratio(c.geometry, c.laminate, c.bolt), 2.0632979954125683, 1e-13);
}

TEST(InterfaceRatio, TendsToOneAsPlateShearVanishes) {
  JointConfig c;
  c.laminate.G_GPa = 1e-9;
  const double R = interface_ratio(c.geometry, c.laminate, c.bolt);
  EXPECT_GT(R, 1.0);
  EXPECT_LT(R - 1.0, 1e-9);
}

TEST(StaticFriction, HandValues) {
  FrictionConstants f;
  EXPECT_NEAR(static_friction(7.0, f, 8.0), 1312.5, 1e-9);
  EXPECT_NEAR(static_friction(0.5, f, 8.0), 93.75, 1e-12);
  EXPECT_DOUBLE_EQ(static_friction(14.0, f, 8.0), 2 * static_friction(7.0, f, 8.0));
  EXPECT_THROW(static_friction(0.0, f, 8.0), std::invalid_argument);
}

TEST(BoltStiffnesses, ReferenceJointFixture) {
  JointConfig c;
  const auto k = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  EXPECT_LT(rel(k.stick, 50086.522106854466), 1e-12);
  EXPECT_LT(rel(k.interface_slip, 34764.134907768798), 1e-12);
  EXPECT_LT(rel(k.bearing, 21881.932553054803), 1e-12);
  EXPECT_EQ(k.global_slip, 0.0);
  EXPECT_GT(k.stick, k.interface_slip);
}

TEST(BoltStiffnesses, BendingFractionOnlyAffectsBearingStiffness) {
  JointConfig c;
  c.friction.bending_fraction = 0.0;
  const auto k0 = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  c.friction.bending_fraction = 0.15;
  const auto k1 = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  c.friction.bending_fraction = 0.3;
  const auto k2 = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  EXPECT_EQ(k0.stick, k1.stick);
  EXPECT_EQ(k0.interface_slip, k1.interface_slip);
  EXPECT_GT(k0.bearing, k1.bearing);
  EXPECT_GT(k1.bearing, k2.bearing);
}

TEST(BoltStiffnesses, LargeRatioLeavesPlateBendingCompliance) {
  // As R grows the bolt terms of the stick compliance are scaled by 1/(1+R);
  // with a tiny bolt shear modulus R is huge, but K1 stays bounded by the
  // plate bending term.
  JointConfig c;
  const auto s = DerivedSections::from(c.geometry);
  const double bend = (4 * c.geometry.pitch_mm - 3 * c.geometry.head_diameter_mm) *
                      std::pow(c.geometry.thickness_mm, 2) /
                      (32 * c.laminate.Ex_GPa * 1e3 * s.plate_inertia);
  c.laminate.G_GPa = 1e4;  // large plate shear modulus pushes R up
  const double R = interface_ratio(c.geometry, c.laminate, c.bolt);
  EXPECT_GT(R, 1e3);
  const auto k = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  EXPECT_LT(k.stick, 1.0 / bend);
  EXPECT_GT(k.stick, 0.9 / bend);
}

TEST(KneePoints, ReferenceJointFixture) {
  JointConfig c;
  const auto s = stiffness_set(c, 0.1, 7.0);
  EXPECT_LT(rel(s.knees.a, 0.038905027463689109), 1e-12);
  EXPECT_LT(rel(s.knees.b, 0.058361357490788475), 1e-12);
  EXPECT_LT(rel(s.knees.c, 0.058361357490788475 + 0.1), 1e-12);
}

TEST(KneePoints, ZeroClearanceSkipsPlateau) {
  JointConfig c;
  const auto s = stiffness_set(c, 0.0, 7.0);
  EXPECT_EQ(s.knees.c, s.knees.b);
}

TEST(KneePoints, AbsolutePolicyClampsToB) {
  JointConfig c;
  c.knee_policy = KneePolicy::absolute;
  const auto small = stiffness_set(c, 0.01, 7.0);
  EXPECT_EQ(small.knees.c, small.knees.b);
  const auto big = stiffness_set(c, 1.0, 7.0);
  EXPECT_EQ(big.knees.c, 1.0);
}

TEST(KneePoints, VanishingTorqueCollapsesSlidingKnees) {
  JointConfig c;
  const auto k = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
  const double R = interface_ratio(c.geometry, c.laminate, c.bolt);
  const double f = static_friction(1e-9, c.friction, c.geometry.bolt_diameter_mm);
  const auto kn = knee_points(0.5, f, k, R);
  EXPECT_LT(kn.a, 1e-10);
  EXPECT_LT(kn.b, 1e-10);
  EXPECT_LE(kn.a, kn.b);
}

TEST(DerivedSections, PureFunctionOfGeometry) {
  JointGeometry g;
  const auto a = DerivedSections::from(g);
  const auto b = DerivedSections::from(g);
  EXPECT_EQ(a.plate_area, b.plate_area);
  EXPECT_EQ(a.bolt_area, b.bolt_area);
  EXPECT_EQ(a.head_contact_area, b.head_contact_area);
  EXPECT_EQ(a.bolt_inertia, b.bolt_inertia);
  EXPECT_EQ(a.plate_inertia, b.plate_inertia);
}

TEST(JointModelProperties, RandomConfigsMatchOracleAndInvariants) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = random_config(rng);
    ASSERT_NO_THROW(c.validate());
    const auto o = oracle(c);
    const double R = interface_ratio(c.geometry, c.laminate, c.bolt);
    EXPECT_GT(R, 1.0);
    EXPECT_LT(rel(R, o.ratio), 1e-12);
    EXPECT_LT(rel(plate_stiffness(c.geometry, c.laminate), o.plate), 1e-12);
    const auto k = bolt_stiffnesses(c.geometry, c.laminate, c.bolt, c.friction);
    EXPECT_LT(rel(k.stick, o.k1), 1e-12);
    EXPECT_LT(rel(k.interface_slip, o.k2), 1e-12);
    EXPECT_LT(rel(k.bearing, o.k4), 1e-12);
    EXPECT_GT(k.stick, k.interface_slip);
    EXPECT_GT(k.interface_slip, 0.0);
    EXPECT_GT(k.bearing, 0.0);

    const double torque = std::uniform_real_distribution<double>(0.5, 15)(rng);
    const double clearance = std::uniform_real_distribution<double>(0, 2)(rng);
    const double f = static_friction(torque, c.friction, c.geometry.bolt_diameter_mm);
    EXPECT_DOUBLE_EQ(static_friction(2 * torque, c.friction, c.geometry.bolt_diameter_mm), 2 * f);
    const auto kn = knee_points(clearance, f, k, R);
    EXPECT_GT(kn.a, 0.0);
    EXPECT_LE(kn.a, kn.b);
    EXPECT_LE(kn.b, kn.c);
  }
}

TEST(BoltParams, BoundsAndSize) {
  BoltParams p{{0.1, 0.1, 0.1}, {7, 7, 7}};
  EXPECT_NO_THROW(p.validate(3));
  EXPECT_THROW(p.validate(2), std::invalid_argument);
  p.clearances_mm[1] = 2.5;
  EXPECT_THROW(p.validate(3), std::invalid_argument);
  p.clearances_mm[1] = 0.1;
  p.torques_Nm[2] = 0.4;
  EXPECT_THROW(p.validate(3), std::invalid_argument);
}
