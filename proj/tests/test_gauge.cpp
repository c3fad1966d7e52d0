#include <gtest/gtest.h>

#include "boltshare/gauge.hpp"
#include "boltshare/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

using namespace boltshare;

TEST(BearingStress, HandValue) {
  EXPECT_DOUBLE_EQ(bolt_bearing_stress(10, 4, 1, 1), 3.0);
  EXPECT_DOUBLE_EQ(bolt_bearing_stress(5, 5, 1.3, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(bolt_bearing_stress(30, 12, 1, 1), 3 * bolt_bearing_stress(10, 4, 1, 1));
  EXPECT_THROW(bolt_bearing_stress(1, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(bolt_bearing_stress(1, 0, 1, -1), std::invalid_argument);
}

TEST(LoadRatios, Examples) {
  const auto u = load_ratios({{4, 3, 2, 1}});
  for (double r : u) EXPECT_DOUBLE_EQ(r, 1.0 / 3.0);
  const auto r = load_ratios({{6, 3, 2, 1}});
  EXPECT_DOUBLE_EQ(r[0], 0.6);
  EXPECT_DOUBLE_EQ(r[1], 0.2);
  EXPECT_DOUBLE_EQ(r[2], 0.2);
  EXPECT_THROW(load_ratios({{2, 5, 3, 2}}), std::domain_error);
}

TEST(LoadRatios, NonMonotoneReadingsGiveNegativeShare) {
  const auto r = load_ratios({{6, 7, 2, 1}});
  EXPECT_LT(r[0], 0.0);
  EXPECT_NEAR(r[0] + r[1] + r[2], 1.0, 1e-15);
}

TEST(LoadRatios, TelescopingScaleInvarianceAndPositivity) {
  auto rng = make_stream(77, "gauge");
  for (int i = 0; i < 2000; ++i) {
    GaugeReadings g{{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -50, 50),
                     uniform(rng, -50, 50)}};
    if (g.sigma[0] == g.sigma[3]) continue;
    const auto r = load_ratios(g);
    // rounding grows with the readings' magnitude over the total drop
    const double cond = 50.0 / std::abs(g.sigma[0] - g.sigma[3]);
    EXPECT_NEAR(r[0] + r[1] + r[2], 1.0, 1e-14 * (1 + cond));
    const double lambda = uniform(rng, 0.01, 100);
    GaugeReadings s = g;
    for (auto& v : s.sigma) v *= lambda;
    const auto rs = load_ratios(s);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(rs[k], r[k], 1e-9 * (1 + std::abs(r[k])));

    std::array<double, 4> m = g.sigma;
    std::sort(m.begin(), m.end(), std::greater<>());
    if (m[0] > m[1] && m[1] > m[2] && m[2] > m[3])
      for (double v : load_ratios({m})) EXPECT_GT(v, 0.0);
  }
}
