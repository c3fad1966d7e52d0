#pragma once

// Experimental bolt-load ratios from four strain-gauge stresses placed
// symmetrically around the holes of a three-bolt joint. Under linear
// superposition the bearing and by-pass concentration factors cancel, so
// each bolt's share is its stress drop over the total drop.

#include <array>
#include <cmath>
#include <stdexcept>

namespace boltshare {

/// Stresses (MPa) at gauge stations 1..4, ordered from the loaded end.
struct GaugeReadings {
  std::array<double, 4> sigma;
};

struct ConcentrationFactors {
  double bearing_1;
  double bearing_2;
  double bypass; // equal at the two symmetric points
};

/// Bearing stress of a bolt from the gauges before and after it.
inline double bolt_bearing_stress(double sigma_before, double sigma_after, double alpha_br_1,
                                  double alpha_br_2) {
  const double sum = alpha_br_1 + alpha_br_2;
  if (!(sum > 0)) throw std::invalid_argument("bolt_bearing_stress: concentration factors must sum > 0");
  return (sigma_before - sigma_after) / sum;
}

/// Bolt load ratios (sum to 1). Non-monotone readings give negative shares,
/// which are returned as-is.
inline std::array<double, 3> load_ratios(const GaugeReadings& r) {
  const auto& s = r.sigma;
  const double total = s[0] - s[3];
  if (total == 0.0 || !std::isfinite(total))
    throw std::domain_error("load_ratios: sigma1 equals sigma4, no load transferred");
  return {(s[0] - s[1]) / total, (s[1] - s[2]) / total, (s[2] - s[3]) / total};
}

}  // namespace boltshare
