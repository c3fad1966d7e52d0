#include <gtest/gtest.h>

#include <cmath>

#include "boltshare/surrogate.hpp"

using namespace boltshare;

namespace {

// A synthetic dataset with a smooth label avoids solver cost in training tests.
Dataset synthetic(std::size_t n, std::uint64_t seed) {
  Dataset ds;
  auto rng = make_stream(seed, "synthetic");
  for (std::size_t i = 0; i < n; ++i) {
    DesignVector x;
    for (std::size_t k = 0; k < kDesignDim; ++k) x[k] = uniform(rng, kDesignLower[k], kDesignUpper[k]);
    const auto z = ds.norm.normalize(x);
    const double u = 0.1 + 0.3 * z[0] * z[0] + 0.2 * std::abs(z[3] - z[5]) + 0.1 * z[1];
    ds.samples.push_back({x, u});
  }
  split_dataset(ds, seed);
  return ds;
}

}  // namespace

TEST(Normalization, RoundTrip) {
  Normalization n;
  auto rng = make_stream(1, "x");
  for (int i = 0; i < 1000; ++i) {
    DesignVector x;
    for (std::size_t k = 0; k < kDesignDim; ++k) x[k] = uniform(rng, kDesignLower[k], kDesignUpper[k]);
    const auto z = n.normalize(x);
    for (double v : z) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    const auto back = n.denormalize(z);
    for (std::size_t k = 0; k < kDesignDim; ++k) EXPECT_NEAR(back[k], x[k], 1e-12);
  }
}

TEST(Split, ProportionsAndDeterminism) {
  Dataset ds;
  ds.samples.resize(1000);
  split_dataset(ds, 42);
  EXPECT_EQ(ds.indices(Split::train).size(), 700u);
  EXPECT_EQ(ds.indices(Split::validation).size(), 100u);
  EXPECT_EQ(ds.indices(Split::test).size(), 200u);
  auto again = ds;
  split_dataset(again, 42);
  EXPECT_EQ(again.split, ds.split);
  split_dataset(again, 43);
  EXPECT_NE(again.split, ds.split);
}

TEST(Split, TooFewSamplesRejected) {
  Dataset ds;
  ds.samples.resize(1);
  EXPECT_THROW(split_dataset(ds, 0), std::invalid_argument);
  ds.samples.resize(9);
  EXPECT_THROW(split_dataset(ds, 0), std::invalid_argument);
  Dataset unsplit;
  unsplit.samples.resize(20);
  EXPECT_THROW(unsplit.indices(Split::train), std::logic_error);
}

TEST(Generate, DeterministicAndIndependentOfJobs) {
  JointConfig cfg;
  const auto a = generate_dataset(cfg, 12, 5);
  GenerateOptions opt;
  opt.jobs = 3;
  const auto b = generate_dataset(cfg, 12, 5, opt);
  ASSERT_EQ(a.samples.size(), 12u);
  ASSERT_EQ(b.samples.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(a.samples[i].x, b.samples[i].x);
    EXPECT_EQ(a.samples[i].u, b.samples[i].u);
    EXPECT_TRUE(in_design_space(a.samples[i].x));
    EXPECT_GE(a.samples[i].u, 0.0);
    EXPECT_LE(a.samples[i].u, 1.0);
  }
  EXPECT_EQ(a.redrawn, b.redrawn);
}

TEST(Generate, LabelsMatchSolver) {
  JointConfig cfg;
  const auto ds = generate_dataset(cfg, 3, 9);
  for (const auto& s : ds.samples) EXPECT_EQ(*solver_unevenness(cfg, s.x), s.u);
  for (const auto& x : ds.redrawn) EXPECT_FALSE(solver_unevenness(cfg, x).has_value());
}

TEST(Generate, IdenticalInputLabel) {
  // Ratio bands of +-2.5 points around 37.2/25.6/37.2 bound u to [0.06, 0.32].
  const auto u = solver_unevenness(JointConfig{}, {0.1, 0.1, 0.1, 7, 7, 7});
  ASSERT_TRUE(u.has_value());
  EXPECT_GT(*u, 0.06);
  EXPECT_LT(*u, 0.32);
}

TEST(Generate, RejectsNonThreeBoltJoint) {
  JointConfig cfg;
  cfg.geometry.n_bolts = 4;
  EXPECT_THROW(generate_dataset(cfg, 10, 0), std::invalid_argument);
  EXPECT_THROW(generate_dataset(JointConfig{}, 0, 0), std::invalid_argument);
}

TEST(RSquared, Definitions) {
  const std::vector<double> t{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(r_squared(t, t), 1.0);
  const std::vector<double> mean(4, 2.5);
  EXPECT_DOUBLE_EQ(r_squared(mean, t), 0.0);
  const std::vector<double> p{1, 2, 3, 5};
  // SS_res = 1, SS_tot = 5
  EXPECT_DOUBLE_EQ(r_squared(p, t), 0.8);
  const std::vector<double> c(4, 1.0);
  EXPECT_THROW(r_squared(p, c), std::domain_error);
}

TEST(Train, ReproducibleBitForBit) {
  const auto ds = synthetic(200, 3);
  TrainConfig cfg;
  cfg.max_epochs = 15;
  const auto a = train(ds, cfg, 11);
  const auto b = train(ds, cfg, 11);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t l = 0; l < a.model.net.layers().size(); ++l) {
    EXPECT_EQ(a.model.net.layers()[l].weights, b.model.net.layers()[l].weights);
    EXPECT_EQ(a.model.net.layers()[l].bias, b.model.net.layers()[l].bias);
  }
  const auto c = train(ds, cfg, 12);
  EXPECT_NE(a.model.net.layers()[0].weights, c.model.net.layers()[0].weights);
}

TEST(Train, LearnsSmoothTargetAndStopsEarly) {
  const auto ds = synthetic(600, 4);
  TrainConfig cfg;
  const auto r = train(ds, cfg, 1);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.history.front().epoch, 0u);
  EXPECT_LT(r.history.back().train_loss, 0.05 * r.history.front().train_loss);
  const auto m = evaluate(r.model, ds);
  EXPECT_GT(m.test.r2, 0.9);
  // returned weights are the best-validation ones
  const auto& best = r.history[r.best_epoch];
  EXPECT_NEAR(m.validation.weighted_mse, best.validation_loss, 1e-12);
}

TEST(Surrogate, FitnessIsClampedPrediction) {
  SurrogateModel m;
  m.net = Mlp::from_layers({{6, 1, {0, 0, 0, 0, 0, 0}, {1.7}}});
  DesignVector x{0.1, 0.1, 0.1, 7, 7, 7};
  EXPECT_DOUBLE_EQ(m.predict(x), 1.7);
  EXPECT_DOUBLE_EQ(m.fitness(x), 1.0);
  m.net.layers()[0].bias[0] = -0.2;
  EXPECT_DOUBLE_EQ(m.fitness(x), 0.0);
}
