#pragma once

// Solver-labelled training data and the learned unevenness predictor.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "boltshare/joint_model.hpp"
#include "boltshare/mlp.hpp"
#include "boltshare/network.hpp"
#include "boltshare/parallel.hpp"
#include "boltshare/random.hpp"

namespace boltshare {

inline constexpr std::size_t kDesignDim = 6;

/// (bhc1, bhc2, bhc3 [mm], T1, T2, T3 [N*m]) for a three-bolt joint.
using DesignVector = std::array<double, kDesignDim>;

inline constexpr DesignVector kDesignLower{kClearanceMin, kClearanceMin, kClearanceMin,
                                           kTorqueMin,    kTorqueMin,    kTorqueMin};
inline constexpr DesignVector kDesignUpper{kClearanceMax, kClearanceMax, kClearanceMax,
                                           kTorqueMax,    kTorqueMax,    kTorqueMax};

inline BoltParams to_params(const DesignVector& x) {
  return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
}

inline bool in_design_space(const DesignVector& x) {
  for (std::size_t k = 0; k < kDesignDim; ++k)
    if (!(x[k] >= kDesignLower[k] && x[k] <= kDesignUpper[k])) return false;
  return true;
}

/// Per-feature min-max scaling to [0, 1].
struct Normalization {
  DesignVector lo = kDesignLower;
  DesignVector hi = kDesignUpper;

  DesignVector normalize(const DesignVector& x) const {
    DesignVector z;
    for (std::size_t k = 0; k < kDesignDim; ++k) z[k] = (x[k] - lo[k]) / (hi[k] - lo[k]);
    return z;
  }
  DesignVector denormalize(const DesignVector& z) const {
    DesignVector x;
    for (std::size_t k = 0; k < kDesignDim; ++k) x[k] = lo[k] + z[k] * (hi[k] - lo[k]);
    return x;
  }
};

struct Sample {
  DesignVector x;
  double u;
};

enum class Split : std::uint8_t { train, validation, test };

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Split> split; // empty until split_dataset() runs
  Normalization norm;
  std::vector<DesignVector> redrawn; // draws rejected because 30 kN was never reached

  std::vector<std::size_t> indices(Split which) const {
    if (split.size() != samples.size()) throw std::logic_error("dataset has not been split");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (split[i] == which) out.push_back(i);
    return out;
  }
};

inline constexpr double kTrainFraction = 0.7;
inline constexpr double kValidationFraction = 0.1;
inline constexpr std::size_t kMinSplitSamples = 10;

/// Shuffles sample indices with the "split" stream and assigns 70/10/20.
inline void split_dataset(Dataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.samples.size();
  if (n < kMinSplitSamples)
    throw std::invalid_argument("split_dataset: need at least " +
                                std::to_string(kMinSplitSamples) + " samples, got " +
                                std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::llround(kTrainFraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(kValidationFraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_stream(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  ds.split.assign(n, Split::test);
  for (std::size_t k = 0; k < n; ++k) {
    if (k < n_train) ds.split[order[k]] = Split::train;
    else if (k < n_train + n_val) ds.split[order[k]] = Split::validation;
  }
}

/// Solver unevenness at `target_N`, or nullopt when the ramp never gets there.
inline std::optional<double> solver_unevenness(const JointConfig& cfg, const DesignVector& x,
                                               double target_N = kDefaultTargetLoadN,
                                               const RampConfig& ramp = {}) {
  try {
    return solve_distribution(cfg, to_params(x), target_N, ramp).unevenness;
  } catch (const TargetLoadNotReached&) {
    return std::nullopt;
  }
}

struct GenerateOptions {
  int jobs = 1;
  double target_N = kDefaultTargetLoadN;
  RampConfig ramp{};
};

/// Draws inputs uniformly over the design space and labels them with the
/// solver. Draws that never reach the target load are replaced by fresh
/// draws; the result depends only on the seed, never on `jobs`.
inline Dataset generate_dataset(const JointConfig& cfg, std::size_t n, std::uint64_t seed,
                                const GenerateOptions& opt = {}) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be at least 1");
  cfg.validate();
  if (cfg.geometry.n_bolts != 3)
    throw std::invalid_argument("generate_dataset: the design vector describes three bolts");
  Dataset ds;
  auto rng = make_stream(seed, "dataset");
  while (ds.samples.size() < n) {
    std::vector<DesignVector> draws(n - ds.samples.size());
    for (auto& x : draws)
      for (std::size_t k = 0; k < kDesignDim; ++k) x[k] = uniform(rng, kDesignLower[k], kDesignUpper[k]);
    std::vector<std::optional<double>> labels(draws.size());
    parallel_for(draws.size(), opt.jobs, [&](std::size_t i) {
      labels[i] = solver_unevenness(cfg, draws[i], opt.target_N, opt.ramp);
    });
    for (std::size_t i = 0; i < draws.size(); ++i) {
      if (labels[i]) ds.samples.push_back({draws[i], *labels[i]});
      else ds.redrawn.push_back(draws[i]);
    }
  }
  return ds;
}

/// Network plus the input scaling it was trained with.
struct SurrogateModel {
  Mlp net;
  Normalization norm;

  double predict(const DesignVector& x) const {
    const auto z = norm.normalize(x);
    return net.forward(z, 1).front();
  }

  std::vector<double> predict_batch(std::span<const DesignVector> xs) const {
    const std::size_t B = xs.size();
    std::vector<double> in(kDesignDim * B);
    for (std::size_t s = 0; s < B; ++s) {
      const auto z = norm.normalize(xs[s]);
      for (std::size_t k = 0; k < kDesignDim; ++k) in[k * B + s] = z[k];
    }
    return net.forward(in, B);
  }

  /// Prediction clamped to the admissible range of unevenness.
  double fitness(const DesignVector& x) const { return std::clamp(predict(x), 0.0, 1.0); }
};

struct TrainConfig {
  std::vector<std::size_t> hidden{30, 40, 40, 30};
  AdamConfig adam{};
  std::size_t batch_size = 32;
  std::size_t max_epochs = 2000;
  std::size_t patience = 20;
  double min_delta = 1.0e-5;
  LossKind loss = LossKind::weighted_mse;
};

struct EpochRecord {
  std::size_t epoch; // 0 = before the first update
  double train_loss;
  double validation_loss;
  double train_mse;
  double validation_mse;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  /// Epoch at which the same stopping rule applied to the training loss
  /// would have fired, if it did within the run.
  std::optional<std::size_t> train_rule_epoch;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, double value)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                           " (loss " + std::to_string(value) + ")"),
        epoch(epoch) {}
  std::size_t epoch;
};

namespace detail {

struct Batch {
  std::vector<double> inputs; // feature-major
  std::vector<double> targets;
  std::size_t size = 0;
};

inline Batch gather(const Dataset& ds, std::span<const std::size_t> idx) {
  Batch b;
  b.size = idx.size();
  b.inputs.resize(kDesignDim * b.size);
  b.targets.resize(b.size);
  for (std::size_t s = 0; s < b.size; ++s) {
    const auto& smp = ds.samples[idx[s]];
    const auto z = ds.norm.normalize(smp.x);
    for (std::size_t k = 0; k < kDesignDim; ++k) b.inputs[k * b.size + s] = z[k];
    b.targets[s] = smp.u;
  }
  return b;
}

/// Tracks the "no improvement beyond min_delta for `patience` epochs" rule.
struct PlateauRule {
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  /// Returns true if the value is an improvement.
  bool observe(double value, double min_delta) {
    if (value < best - min_delta) {
      best = value;
      stale = 0;
      return true;
    }
    ++stale;
    return false;
  }
};

}  // namespace detail

/// Mini-batch training on the train split; early stopping watches the
/// validation loss and the best-validation weights are returned.
inline TrainResult train(const Dataset& ds, const TrainConfig& cfg, std::uint64_t seed) {
  const auto train_idx = ds.indices(Split::train);
  const auto val_idx = ds.indices(Split::validation);
  if (train_idx.empty() || val_idx.empty()) throw std::invalid_argument("train: empty split");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");

  std::vector<std::size_t> sizes{kDesignDim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  auto init_rng = make_stream(seed, "init");
  auto shuffle_rng = make_stream(seed, "shuffle");

  TrainResult res;
  res.model.norm = ds.norm;
  res.model.net = Mlp::initialized(sizes, init_rng);
  Mlp best = res.model.net;
  AdamOptimizer adam(res.model.net, cfg.adam);

  const auto train_all = detail::gather(ds, train_idx);
  const auto val_all = detail::gather(ds, val_idx);
  auto record = [&](std::size_t epoch) {
    const auto pt = res.model.net.forward(train_all.inputs, train_all.size);
    const auto pv = res.model.net.forward(val_all.inputs, val_all.size);
    EpochRecord r{epoch, loss(cfg.loss, pt, train_all.targets), loss(cfg.loss, pv, val_all.targets),
                  mse(pt, train_all.targets), mse(pv, val_all.targets)};
    if (!std::isfinite(r.train_loss) || !std::isfinite(r.validation_loss))
      throw TrainingDiverged(epoch, r.train_loss);
    res.history.push_back(r);
    return r;
  };

  detail::PlateauRule val_rule, train_rule;
  const auto r0 = record(0);
  val_rule.observe(r0.validation_loss, cfg.min_delta);
  train_rule.observe(r0.train_loss, cfg.min_delta);

  std::vector<std::size_t> order = train_idx;
  std::vector<DenseLayer> grad;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const auto b = detail::gather(ds, std::span(order).subspan(start, len));
      const double l = res.model.net.loss_and_gradient(b.inputs, b.targets, b.size, cfg.loss, grad);
      if (!std::isfinite(l)) throw TrainingDiverged(epoch, l);
      adam.step(res.model.net, grad);
    }
    const auto r = record(epoch);
    if (val_rule.observe(r.validation_loss, cfg.min_delta)) {
      best = res.model.net;
      res.best_epoch = epoch;
    }
    if (!train_rule.observe(r.train_loss, cfg.min_delta) && train_rule.stale >= cfg.patience &&
        !res.train_rule_epoch)
      res.train_rule_epoch = epoch;
    if (val_rule.stale >= cfg.patience) {
      res.early_stopped = true;
      break;
    }
  }
  res.model.net = std::move(best);
  return res;
}

struct Metrics {
  double mse;
  double weighted_mse;
  double r2;
};

struct SplitMetrics {
  Metrics train;
  Metrics validation;
  Metrics test;
};

/// R^2 = 1 - SS_res / SS_tot; undefined for constant targets.
inline double r_squared(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("r_squared: length mismatch");
  const double mean = std::accumulate(target.begin(), target.end(), 0.0) /
                      static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (ss_tot == 0.0) throw std::domain_error("r_squared: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

inline Metrics evaluate_samples(const SurrogateModel& model, const Dataset& ds,
                                std::span<const std::size_t> idx) {
  if (idx.empty()) throw std::invalid_argument("evaluate: empty split");
  std::vector<DesignVector> xs;
  std::vector<double> ys;
  for (auto i : idx) {
    xs.push_back(ds.samples[i].x);
    ys.push_back(ds.samples[i].u);
  }
  const auto pred = model.predict_batch(xs);
  return {mse(pred, ys), weighted_mse(pred, ys), r_squared(pred, ys)};
}

inline SplitMetrics evaluate(const SurrogateModel& model, const Dataset& ds) {
  return {evaluate_samples(model, ds, ds.indices(Split::train)),
          evaluate_samples(model, ds, ds.indices(Split::validation)),
          evaluate_samples(model, ds, ds.indices(Split::test))};
}

}  // namespace boltshare
