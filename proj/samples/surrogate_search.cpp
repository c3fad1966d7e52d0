// Small end-to-end run: label a dataset, fit the surrogate, search it with
// PSO and check the winner against the solver.

#include <cstdio>

#include "boltshare/optimizer.hpp"
#include "boltshare/surrogate.hpp"

int main() {
  using namespace boltshare;
  const JointConfig joint;
  const std::uint64_t seed = 7;

  auto ds = generate_dataset(joint, 400, seed);
  split_dataset(ds, seed);
  const auto fit = train(ds, TrainConfig{}, seed);
  const auto m = evaluate(fit.model, ds);
  std::printf("trained %zu epochs, test R^2 = %.3f\n", fit.history.back().epoch, m.test.r2);

  OptimizerConfig oc;
  oc.seed = seed;
  const auto trace = pso_optimize(DesignSpace{}, FitnessBackend::surrogate(fit.model), oc);
  const auto& x = trace.best_x;
  std::printf("surrogate optimum: bhc %.2f %.2f %.2f mm, torque %.2f %.2f %.2f N*m, u_hat %.4f\n",
              x[0], x[1], x[2], x[3], x[4], x[5], trace.best_u);

  const auto check = verify_candidate(x, joint);
  std::printf("solver says u = %.4f (ratios %.1f%% / %.1f%% / %.1f%%)\n", check.unevenness,
              100 * check.ratios[0], 100 * check.ratios[1], 100 * check.ratios[2]);
}
