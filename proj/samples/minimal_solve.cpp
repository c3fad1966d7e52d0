// Load sharing of the reference three-bolt joint for a few designs.

#include <cstdio>

#include "boltshare/network.hpp"

int main() {
  using namespace boltshare;
  const JointConfig joint;  // reference laminate and titanium bolts

  struct Case {
    const char* name;
    BoltParams params;
  };
  const Case cases[] = {
      {"identical", {{0.1, 0.1, 0.1}, {7, 7, 7}}},
      {"random", {{1.04, 0.63, 0.12}, {8.41, 9.25, 5.90}}},
      {"tuned", {{0.4, 0.2, 0.4}, {11, 10, 15}}},
  };

  for (const auto& c : cases) {
    const auto d = solve_distribution(joint, c.params);
    std::printf("%-10s  ratios %.1f%% / %.1f%% / %.1f%%  u = %.4f  (end displacement %.3f mm)\n",
                c.name, 100 * d.ratios[0], 100 * d.ratios[1], 100 * d.ratios[2], d.unevenness,
                d.u_mm);
  }
}
