#pragma once

// Closed-form stiffness, friction and knee-point relations for a single bolt
// station of a single-lap multi-bolt composite joint.
//
// Units: all inputs are taken in engineering units (mm, GPa, N*m) and
// converted once at the boundary; every quantity returned is in N and mm
// (stiffness in N/mm).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace boltshare {

inline constexpr double kMPaPerGPa = 1.0e3;
inline constexpr double kNmmPerNm = 1.0e3;

struct JointGeometry {
  double pitch_mm = 60.0;
  double bolt_diameter_mm = 8.0;
  double head_diameter_mm = 14.0;
  double thickness_mm = 3.0;
  double width_mm = 20.0;
  int n_bolts = 3;

  void validate() const {
    if (!(pitch_mm > 0 && bolt_diameter_mm > 0 && head_diameter_mm > 0 &&
          thickness_mm > 0 && width_mm > 0))
      throw std::invalid_argument("joint geometry: lengths must be positive");
    if (!(head_diameter_mm > bolt_diameter_mm))
      throw std::invalid_argument("joint geometry: head diameter must exceed bolt diameter");
    if (!(width_mm > bolt_diameter_mm))
      throw std::invalid_argument("joint geometry: plate width must exceed bolt diameter");
    if (n_bolts < 2)
      throw std::invalid_argument("joint geometry: at least two bolts required");
  }
};

/// Homogenized in-plane laminate moduli.
struct LaminateProps {
  double Ex_GPa = 71.60;
  double Ey_GPa = 71.60;
  double G_GPa = 4.57;

  void validate() const {
    if (!(Ex_GPa > 0 && Ey_GPa > 0 && G_GPa > 0))
      throw std::invalid_argument("laminate: moduli must be positive");
  }
};

struct BoltProps {
  double E_GPa = 109.78;
  double G_GPa = 41.27;
  double poisson = 0.33;

  void validate() const {
    if (!(E_GPa > 0 && G_GPa > 0))
      throw std::invalid_argument("bolt: moduli must be positive");
    if (!(poisson > 0 && poisson < 0.5))
      throw std::invalid_argument("bolt: Poisson ratio must lie in (0, 0.5)");
  }
};

struct FrictionConstants {
  double friction_coeff = 0.3;    // v
  double torque_coeff = 0.2;      // k, torque = k * preload * d
  double bending_fraction = 0.15; // beta

  void validate() const {
    if (!(friction_coeff > 0))
      throw std::invalid_argument("friction: coefficient must be positive");
    if (!(torque_coeff > 0))
      throw std::invalid_argument("friction: torque coefficient must be positive");
    if (!(bending_fraction >= 0 && bending_fraction < 1))
      throw std::invalid_argument("friction: bending fraction must lie in [0, 1)");
  }
};

/// Where the full-bearing knee `c` sits relative to the sliding knees.
enum class KneePolicy {
  offset_from_b, ///< c = b + clearance: the plateau slides exactly the clearance
  absolute,      ///< c = max(b, clearance): clearance read as element displacement
};

struct JointConfig {
  JointGeometry geometry;
  LaminateProps laminate;
  BoltProps bolt;
  FrictionConstants friction;
  KneePolicy knee_policy = KneePolicy::offset_from_b;

  void validate() const {
    geometry.validate();
    laminate.validate();
    bolt.validate();
    friction.validate();
  }
};

/// Section properties derived from the geometry (mm^2, mm^4).
struct DerivedSections {
  double plate_area;        // A_p = w t
  double bolt_area;         // A_b = pi d^2 / 4
  double head_contact_area; // A_0 = pi (Phi^2 - d^2) / 4
  double bolt_inertia;      // I_b = pi d^4 / 64
  double plate_inertia;     // I_p = w t^3 / 12

  static DerivedSections from(const JointGeometry& g) {
    const double pi = std::numbers::pi;
    const double d = g.bolt_diameter_mm;
    const double t = g.thickness_mm;
    return {g.width_mm * t,
            pi * d * d / 4.0,
            pi * (g.head_diameter_mm * g.head_diameter_mm - d * d) / 4.0,
            pi * d * d * d * d / 64.0,
            g.width_mm * t * t * t / 12.0};
  }
};

/// Tangent stiffnesses of the bolt element in each of its four phases (N/mm).
struct BoltStiffnesses {
  double stick;          // K1: both interfaces sticking
  double interface_slip; // K2: plate/plate interface sliding
  double global_slip;    // K3: plateau, zero tangent
  double bearing;        // K4: shank bearing on the hole edge
};

struct Knees {
  double a; // end of stick phase
  double b; // onset of global sliding
  double c; // onset of shank-hole bearing
};

/// Everything the network solver needs for one bolt station.
struct StiffnessSet {
  double plate;
  BoltStiffnesses bolt;
  double interface_ratio;
  double static_friction_N;
  Knees knees;
};

inline double plate_stiffness(const JointGeometry& geom, const LaminateProps& lam) {
  const auto s = DerivedSections::from(geom);
  return lam.Ex_GPa * kMPaPerGPa * s.plate_area / geom.pitch_mm;
}

/// Ratio of head/plate to plate/plate interface forces; always > 1.
inline double interface_ratio(const JointGeometry& geom, const LaminateProps& lam,
                              const BoltProps& bolt) {
  const auto s = DerivedSections::from(geom);
  const double t = geom.thickness_mm;
  const double d = geom.bolt_diameter_mm;
  const double shape = 64.0 * t * t / (3.0 * d * d * (1.0 + bolt.poisson)) + 2.4;
  return shape * (s.head_contact_area * lam.G_GPa) / (s.bolt_area * bolt.G_GPa) + 1.0;
}

/// Maximum static friction force per interface from the installation torque.
inline double static_friction(double torque_Nm, const FrictionConstants& fric,
                              double bolt_diameter_mm) {
  if (!(torque_Nm > 0)) throw std::invalid_argument("static_friction: torque must be positive");
  return fric.friction_coeff * torque_Nm * kNmmPerNm / (fric.torque_coeff * bolt_diameter_mm);
}

inline BoltStiffnesses bolt_stiffnesses(const JointGeometry& geom, const LaminateProps& lam,
                                        const BoltProps& bolt, const FrictionConstants& fric) {
  const auto s = DerivedSections::from(geom);
  const double t = geom.thickness_mm;
  const double R = interface_ratio(geom, lam, bolt);
  const double Ab_Gb = s.bolt_area * bolt.G_GPa * kMPaPerGPa;
  const double Eb_Ib = bolt.E_GPa * kMPaPerGPa * s.bolt_inertia;
  const double A0_Gp = s.head_contact_area * lam.G_GPa * kMPaPerGPa;
  const double Epx = lam.Ex_GPa * kMPaPerGPa;
  const double Epy = lam.Ey_GPa * kMPaPerGPa;
  const double Eb = bolt.E_GPa * kMPaPerGPa;

  const double shear_and_bending = 12.0 * t / (5.0 * Ab_Gb) + 8.0 * t * t * t / (3.0 * Eb_Ib);
  const double plate_bending =
      (4.0 * geom.pitch_mm - 3.0 * geom.head_diameter_mm) * t * t / (32.0 * Epx * s.plate_inertia);

  const double c1 = (shear_and_bending + (3.0 - R) * t / (4.0 * A0_Gp)) / (1.0 + R) + plate_bending;
  const double c2 = shear_and_bending + 3.0 * t / (4.0 * A0_Gp) + plate_bending;
  const double c4 = 4.0 * t / (3.0 * lam.G_GPa * kMPaPerGPa * s.plate_area) +
                    (4.0 / (t * Eb) + 2.0 / (t * std::sqrt(Epx * Epy))) *
                        (1.0 + 3.0 * fric.bending_fraction);

  BoltStiffnesses k{1.0 / c1, 1.0 / c2, 0.0, 1.0 / c4};
  if (!(std::isfinite(k.stick) && std::isfinite(k.interface_slip) && std::isfinite(k.bearing)) ||
      k.stick <= 0 || k.interface_slip <= 0 || k.bearing <= 0)
    throw std::domain_error("bolt_stiffnesses: non-finite or non-positive stiffness");
  return k;
}

/// Displacement knees of the four-phase element curve. `clearance_mm` sets
/// the full-bearing knee according to `policy`.
inline Knees knee_points(double clearance_mm, double static_friction_N,
                         const BoltStiffnesses& k, double ratio,
                         KneePolicy policy = KneePolicy::offset_from_b) {
  const double a = static_friction_N * (1.0 / ratio + 1.0) / k.stick;
  const double b = a + static_friction_N * (1.0 - 1.0 / ratio) / k.interface_slip;
  const double c = policy == KneePolicy::offset_from_b ? b + clearance_mm
                                                       : std::max(b, clearance_mm);
  return {a, b, c};
}

inline StiffnessSet stiffness_set(const JointConfig& cfg, double clearance_mm, double torque_Nm) {
  const auto& g = cfg.geometry;
  StiffnessSet s{};
  s.plate = plate_stiffness(g, cfg.laminate);
  s.bolt = bolt_stiffnesses(g, cfg.laminate, cfg.bolt, cfg.friction);
  s.interface_ratio = interface_ratio(g, cfg.laminate, cfg.bolt);
  s.static_friction_N = static_friction(torque_Nm, cfg.friction, g.bolt_diameter_mm);
  s.knees = knee_points(clearance_mm, s.static_friction_N, s.bolt, s.interface_ratio,
                        cfg.knee_policy);
  return s;
}

// Design-space bounds for a single bolt.
inline constexpr double kClearanceMin = 0.0;
inline constexpr double kClearanceMax = 2.0;
inline constexpr double kTorqueMin = 0.5;
inline constexpr double kTorqueMax = 15.0;

/// Clearances (mm) and tightening torques (N*m), one entry per bolt.
struct BoltParams {
  std::vector<double> clearances_mm;
  std::vector<double> torques_Nm;

  std::size_t size() const { return clearances_mm.size(); }

  void validate(int n_bolts) const {
    if (clearances_mm.size() != static_cast<std::size_t>(n_bolts) ||
        torques_Nm.size() != static_cast<std::size_t>(n_bolts))
      throw std::invalid_argument("bolt params: expected " + std::to_string(n_bolts) +
                                  " clearances and torques");
    for (double c : clearances_mm)
      if (!(c >= kClearanceMin && c <= kClearanceMax))
        throw std::invalid_argument("bolt params: clearance " + std::to_string(c) +
                                    " mm outside [0, 2]");
    for (double t : torques_Nm)
      if (!(t >= kTorqueMin && t <= kTorqueMax))
        throw std::invalid_argument("bolt params: torque " + std::to_string(t) +
                                    " N*m outside [0.5, 15]");
  }

  BoltParams reversed() const {
    return {{clearances_mm.rbegin(), clearances_mm.rend()},
            {torques_Nm.rbegin(), torques_Nm.rend()}};
  }
};

}  // namespace boltshare
