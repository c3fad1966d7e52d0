#include <gtest/gtest.h>

#include <cmath>

#include "boltshare/mlp.hpp"

using namespace boltshare;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

// Central differences on every parameter; compares against the analytic
// gradient with a relative tolerance (absolute for tiny components).
void check_gradient(Mlp net, const std::vector<double>& in, const std::vector<double>& tgt,
                    std::size_t batch, LossKind kind) {
  std::vector<DenseLayer> grad;
  net.loss_and_gradient(in, tgt, batch, kind, grad);
  std::vector<DenseLayer> scratch;
  auto value = [&] { return net.loss_and_gradient(in, tgt, batch, kind, scratch); };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto check = [&](std::vector<double>& params, const std::vector<double>& g) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double keep = params[k];
        const double h = 1e-6 * std::max(1.0, std::abs(keep));
        params[k] = keep + h;
        const double up = value();
        params[k] = keep - h;
        const double down = value();
        params[k] = keep;
        const double fd = (up - down) / (2 * h);
        const double scale = std::max(std::abs(fd), std::abs(g[k]));
        if (scale < 1e-7) continue;
        EXPECT_LT(std::abs(fd - g[k]) / scale, 1e-4) << "layer " << l << " index " << k;
      }
    };
    check(net.layers()[l].weights, grad[l].weights);
    check(net.layers()[l].bias, grad[l].bias);
  }
}

}  // namespace

TEST(Loss, WeightedMseHandValues) {
  const std::vector<double> p0{0.1}, t0{0.0};
  // (0.1)^2 / 0.001
  EXPECT_NEAR(weighted_mse(p0, t0), 10.0, 1e-12);
  const std::vector<double> p1{0.6}, t1{0.5};
  EXPECT_NEAR(weighted_mse(p1, t1), 0.01 / 0.501, 1e-15);
  EXPECT_NEAR(weighted_mse(p1, t1), 0.019960, 1e-6);
  const std::vector<double> p2{0.2}, t2{0.1};
  EXPECT_NEAR(weighted_mse(p2, t2), 0.09901, 1e-5);
  EXPECT_EQ(weighted_mse(t1, t1), 0.0);
  EXPECT_THROW(weighted_mse(p0, std::vector<double>{}), std::invalid_argument);
}

TEST(Loss, WeightDecreasesWithTarget) {
  Rng rng = make_stream(1, "test");
  for (int i = 0; i < 200; ++i) {
    const double r = uniform(rng, -1, 1);
    const double t = uniform(rng, 0, 0.9);
    const double t2 = t + uniform(rng, 1e-3, 0.1);
    const std::vector<double> pa{t + r}, ta{t}, pb{t2 + r}, tb{t2};
    if (r == 0) continue;
    EXPECT_GT(weighted_mse(pa, ta), weighted_mse(pb, tb));
    EXPECT_GT(weighted_mse(pa, ta), 0.0);
  }
}

TEST(Mlp, ShapesAndParameterCount) {
  Rng rng = make_stream(3, "init");
  const auto net = Mlp::initialized({6, 30, 40, 40, 30, 1}, rng);
  EXPECT_EQ(net.layer_sizes(), (std::vector<std::size_t>{6, 30, 40, 40, 30, 1}));
  EXPECT_EQ(net.parameter_count(), 6u * 30 + 30 + 30 * 40 + 40 + 40 * 40 + 40 + 40 * 30 + 30 + 30 + 1);
  for (const auto& l : net.layers()) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (double w : l.weights) EXPECT_LE(std::abs(w), limit);
    for (double b : l.bias) EXPECT_LE(std::abs(b), limit);
  }
}

TEST(Mlp, FromLayersValidates) {
  std::vector<DenseLayer> bad{{2, 1, {1.0}, {0.0}}};
  EXPECT_THROW(Mlp::from_layers(bad), std::invalid_argument);
  std::vector<DenseLayer> mismatch{{2, 2, {1, 0, 0, 1}, {0, 0}}, {3, 1, {1, 1, 1}, {0}}};
  EXPECT_THROW(Mlp::from_layers(mismatch), std::invalid_argument);
  std::vector<DenseLayer> nan{{1, 1, {std::nan("")}, {0}}};
  EXPECT_THROW(Mlp::from_layers(nan), std::invalid_argument);
}

TEST(Mlp, ForwardHandComputed) {
  // 2 -> 2 (relu) -> 1
  auto net = Mlp::from_layers({{2, 2, {1, -1, 2, 1}, {0, -10}}, {2, 1, {3, 5}, {0.5}}});
  // x = (2, 1): hidden pre = (1, -5) -> (1, 0); out = 3 + 0.5
  const std::vector<double> x{2, 1};
  EXPECT_DOUBLE_EQ(net.forward(x, 1)[0], 3.5);
}

TEST(Mlp, GradientMatchesFiniteDifferences6To3To1) {
  Rng rng = make_stream(5, "init");
  const auto net = Mlp::initialized({6, 3, 1}, rng);
  const std::size_t batch = 8;
  check_gradient(net, random_vector(rng, 6 * batch, 0, 1), random_vector(rng, batch, 0.05, 1),
                 batch, LossKind::weighted_mse);
}

TEST(Mlp, GradientMatchesFiniteDifferencesRandomNets) {
  Rng rng = make_stream(9, "shapes");
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> sizes{1 + uniform_index(rng, 6)};
    const std::size_t depth = 1 + uniform_index(rng, 3);
    for (std::size_t d = 0; d < depth; ++d) sizes.push_back(1 + uniform_index(rng, 7));
    sizes.push_back(1);
    auto net = Mlp::initialized(sizes, rng);
    // nonzero biases keep dead units off the rectifier kink
    for (auto& l : net.layers())
      for (auto& b : l.bias) b = uniform(rng, -0.5, 0.5);
    const std::size_t batch = 1 + uniform_index(rng, 10);
    check_gradient(net, random_vector(rng, sizes[0] * batch, -1, 1),
                   random_vector(rng, batch, 0.0, 1), batch,
                   trial % 2 ? LossKind::mse : LossKind::weighted_mse);
  }
}

TEST(Mlp, BatchForwardBitIdenticalToSingle) {
  Rng rng = make_stream(2, "init");
  const auto net = Mlp::initialized({6, 30, 40, 40, 30, 1}, rng);
  const std::size_t B = 37;
  const auto x = random_vector(rng, 6 * B, 0, 1);
  const auto batch = net.forward(x, B);
  for (std::size_t s = 0; s < B; ++s) {
    std::vector<double> one(6);
    for (std::size_t k = 0; k < 6; ++k) one[k] = x[k * B + s];
    EXPECT_EQ(net.forward(one, 1)[0], batch[s]);
  }
}

TEST(Adam, FitsConstantTarget) {
  Rng rng = make_stream(4, "init");
  auto net = Mlp::initialized({2, 8, 1}, rng);
  AdamOptimizer opt(net, {.learning_rate = 1e-2});
  const std::size_t B = 16;
  const auto x = random_vector(rng, 2 * B, 0, 1);
  const std::vector<double> t(B, 0.4);
  std::vector<DenseLayer> g;
  double l = 0;
  for (int it = 0; it < 2000; ++it) {
    l = net.loss_and_gradient(x, t, B, LossKind::mse, g);
    opt.step(net, g);
  }
  EXPECT_LT(l, 1e-6);
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  auto net = Mlp::from_layers({{1, 1, {0.5}, {0.1}}});
  AdamOptimizer opt(net, {});
  std::vector<DenseLayer> g{{1, 1, {3.0}, {-2.0}}};
  opt.step(net, g);
  EXPECT_NEAR(net.layers()[0].weights[0], 0.5 - 1e-3, 1e-10);
  EXPECT_NEAR(net.layers()[0].bias[0], 0.1 + 1e-3, 1e-10);
}
