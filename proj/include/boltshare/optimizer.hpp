#pragma once

// Inverse design: minimize load-distribution unevenness over clearances and
// torques by exhaustive grid enumeration, a real-coded genetic algorithm, or
// global-best particle swarm, against either the exact solver or the
// surrogate.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "boltshare/csv.hpp"
#include "boltshare/network.hpp"
#include "boltshare/parallel.hpp"
#include "boltshare/random.hpp"
#include "boltshare/surrogate.hpp"

namespace boltshare {

struct GridAxis {
  double start;
  double step;
  std::size_t count;

  double value(std::size_t k) const {
    // rounded to the nearest micro-unit so grid values print as their decimals
    return std::round((start + step * static_cast<double>(k)) * 1e6) / 1e6;
  }
};

struct DesignSpace {
  DesignVector lower = kDesignLower;
  DesignVector upper = kDesignUpper;
  std::array<GridAxis, kDesignDim> grid{GridAxis{0.2, 0.2, 10}, GridAxis{0.2, 0.2, 10},
                                        GridAxis{0.2, 0.2, 10}, GridAxis{0.5, 0.5, 30},
                                        GridAxis{0.5, 0.5, 30}, GridAxis{0.5, 0.5, 30}};
  double precision = 0.01; // continuous-mode resolution

  std::uint64_t pattern_count() const {
    std::uint64_t n = 1;
    for (const auto& a : grid) n *= a.count;
    return n;
  }

  /// Pattern `index` in lexicographic order (first coordinate most significant).
  DesignVector pattern(std::uint64_t index) const {
    DesignVector x;
    for (std::size_t k = kDesignDim; k-- > 0;) {
      x[k] = grid[k].value(static_cast<std::size_t>(index % grid[k].count));
      index /= grid[k].count;
    }
    return x;
  }

  double range(std::size_t k) const { return upper[k] - lower[k]; }

  /// Rounds to `precision` and clamps into the box.
  DesignVector snap(DesignVector x) const {
    const double ticks = std::round(1.0 / precision);
    for (std::size_t k = 0; k < kDesignDim; ++k)
      x[k] = std::clamp(std::round(x[k] * ticks) / ticks, lower[k], upper[k]);
    return x;
  }

  bool contains(const DesignVector& x) const {
    for (std::size_t k = 0; k < kDesignDim; ++k)
      if (!(x[k] >= lower[k] && x[k] <= upper[k])) return false;
    return true;
  }
};

enum class BackendKind { exact_solver, surrogate, custom };

inline std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::exact_solver: return "solver";
    case BackendKind::surrogate: return "surrogate";
    case BackendKind::custom: return "custom";
  }
  return "?";
}

/// Maps a design vector to unevenness. Copies share one call counter.
class FitnessBackend {
 public:
  /// Fitness from the spring-network solve; designs that never reach the
  /// target load score 1.0.
  static FitnessBackend exact(JointConfig cfg, double target_N = kDefaultTargetLoadN,
                              RampConfig ramp = {}) {
    cfg.validate();
    return FitnessBackend(BackendKind::exact_solver,
                          [cfg, target_N, ramp](const DesignVector& x) {
                            return solver_unevenness(cfg, x, target_N, ramp).value_or(1.0);
                          },
                          nullptr);
  }

  static FitnessBackend surrogate(SurrogateModel model) {
    auto m = std::make_shared<const SurrogateModel>(std::move(model));
    return FitnessBackend(
        BackendKind::surrogate, [m](const DesignVector& x) { return m->fitness(x); },
        [m](std::span<const DesignVector> xs) {
          auto out = m->predict_batch(xs);
          for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
          return out;
        });
  }

  static FitnessBackend custom(std::function<double(const DesignVector&)> fn) {
    return FitnessBackend(BackendKind::custom, std::move(fn), nullptr);
  }

  BackendKind kind() const { return kind_; }
  std::uint64_t calls() const { return calls_->load(); }

  double operator()(const DesignVector& x) const {
    ++*calls_;
    return single_(x);
  }

  std::vector<double> evaluate(std::span<const DesignVector> xs, int jobs = 1) const {
    std::vector<double> out(xs.size());
    if (batch_) {
      *calls_ += xs.size();
      constexpr std::size_t kChunk = 1024;
      const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
      parallel_for(chunks, jobs, [&](std::size_t c) {
        const auto part = xs.subspan(c * kChunk, std::min(kChunk, xs.size() - c * kChunk));
        const auto v = batch_(part);
        std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(c * kChunk));
      });
      return out;
    }
    parallel_for(xs.size(), jobs, [&](std::size_t i) { out[i] = (*this)(xs[i]); });
    return out;
  }

 private:
  using Single = std::function<double(const DesignVector&)>;
  using Batch = std::function<std::vector<double>(std::span<const DesignVector>)>;

  FitnessBackend(BackendKind kind, Single single, Batch batch)
      : kind_(kind), single_(std::move(single)), batch_(std::move(batch)),
        calls_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

  BackendKind kind_;
  Single single_;
  Batch batch_;
  std::shared_ptr<std::atomic<std::uint64_t>> calls_;
};

/// Lower fitness wins; ties go to the lexicographically smaller vector.
inline bool better(double fa, const DesignVector& a, double fb, const DesignVector& b) {
  if (fa != fb) return fa < fb;
  return a < b;
}

// ---------------------------------------------------------------------------
// Grid enumeration

struct GridOptions {
  int jobs = 1;
  std::optional<std::filesystem::path> database_dir; // stream every pattern here
  std::uint64_t chunk_rows = 1'000'000;
  /// The exact solver is only allowed on reduced grids up to this size.
  std::uint64_t max_exact_patterns = 100'000;
};

struct GridResult {
  DesignVector best_x{};
  double best_u = std::numeric_limits<double>::infinity();
  std::uint64_t evaluated = 0;
  std::vector<std::uint64_t> skipped; // pattern indices whose evaluation failed
  std::vector<std::filesystem::path> database_files;
};

inline constexpr std::string_view kDatasetHeader = "bhc1,bhc2,bhc3,T1,T2,T3,u";

inline GridResult grid_search(const DesignSpace& space, const FitnessBackend& backend,
                              const GridOptions& opt = {}) {
  const std::uint64_t total = space.pattern_count();
  if (total == 0) throw std::invalid_argument("grid_search: empty grid");
  if (backend.kind() == BackendKind::exact_solver && total > opt.max_exact_patterns)
    throw std::invalid_argument("grid_search: " + std::to_string(total) +
                                " patterns exceed the exact-solver budget of " +
                                std::to_string(opt.max_exact_patterns) + "; use the surrogate");
  if (opt.chunk_rows == 0) throw std::invalid_argument("grid_search: chunk_rows must be positive");
  if (opt.database_dir) std::filesystem::create_directories(*opt.database_dir);

  const std::uint64_t n_chunks = (total + opt.chunk_rows - 1) / opt.chunk_rows;
  std::vector<GridResult> partial(n_chunks);
  std::vector<std::filesystem::path> files(n_chunks);

  parallel_for(n_chunks, opt.jobs, [&](std::size_t c) {
    auto& res = partial[c];
    const std::uint64_t begin = c * opt.chunk_rows;
    const std::uint64_t end = std::min(total, begin + opt.chunk_rows);
    std::ofstream os;
    std::string buf;
    if (opt.database_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "db_%05zu.csv", c);
      files[c] = *opt.database_dir / name;
      os.open(files[c], std::ios::binary);
      if (!os) throw std::runtime_error("grid_search: cannot write " + files[c].string());
      buf.append(kDatasetHeader).push_back('\n');
    }
    constexpr std::uint64_t kBatch = 4096;
    std::vector<DesignVector> xs;
    std::vector<double> us;
    std::vector<char> ok;
    for (std::uint64_t b = begin; b < end; b += kBatch) {
      const std::uint64_t len = std::min(kBatch, end - b);
      xs.resize(len);
      for (std::uint64_t i = 0; i < len; ++i) xs[i] = space.pattern(b + i);
      ok.assign(len, 1);
      try {
        us = backend.evaluate(xs);
      } catch (...) {
        us.assign(len, 0.0);
        for (std::uint64_t i = 0; i < len; ++i) {
          try {
            us[i] = backend(xs[i]);
          } catch (...) {
            ok[i] = 0;
          }
        }
      }
      for (std::uint64_t i = 0; i < len; ++i) {
        if (!ok[i] || !std::isfinite(us[i])) {
          res.skipped.push_back(b + i);
          continue;
        }
        ++res.evaluated;
        if (better(us[i], xs[i], res.best_u, res.best_x)) {
          res.best_u = us[i];
          res.best_x = xs[i];
        }
        if (opt.database_dir) {
          for (double v : xs[i]) {
            csv::append_number(buf, v);
            buf.push_back(',');
          }
          csv::append_number(buf, us[i]);
          buf.push_back('\n');
        }
      }
      if (os && buf.size() > (1u << 20)) {
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
      }
    }
    if (opt.database_dir) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (!os) throw std::runtime_error("grid_search: write failed for " + files[c].string());
    }
  });

  GridResult out;
  for (auto& p : partial) {
    out.evaluated += p.evaluated;
    out.skipped.insert(out.skipped.end(), p.skipped.begin(), p.skipped.end());
    if (p.evaluated > 0 && better(p.best_u, p.best_x, out.best_u, out.best_x)) {
      out.best_u = p.best_u;
      out.best_x = p.best_x;
    }
  }
  if (out.evaluated == 0) throw std::runtime_error("grid_search: every pattern failed");
  if (opt.database_dir) out.database_files = std::move(files);
  return out;
}

// ---------------------------------------------------------------------------
// Population methods

/// Stop when the best value changed by less than `tolerance` (relative) over
/// the last `window` iterations, or after `max_iterations`.
struct StoppingRule {
  std::size_t window = 20;
  double tolerance = 1.0e-3;
  std::size_t max_iterations = 200;

  bool converged(std::span<const double> best_history) const {
    if (best_history.size() <= window) return false;
    const double old = best_history[best_history.size() - 1 - window];
    const double now = best_history.back();
    const double scale = std::max(std::abs(old), std::numeric_limits<double>::min());
    return std::abs(old - now) / scale < tolerance;
  }
};

struct GaConfig {
  std::size_t population = 50;
  std::size_t tournament = 3;
  double crossover_prob = 0.9;
  double blend_alpha = 0.5;
  double mutation_prob = 0.1;
  double mutation_scale = 0.05; // sigma as a fraction of each variable's range
  std::size_t elitism = 2;
};

struct PsoConfig {
  std::size_t swarm = 40;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  double velocity_clamp = 0.2; // fraction of each variable's range
};

struct OptimizerConfig {
  GaConfig ga{};
  PsoConfig pso{};
  StoppingRule stop{};
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct IterationRecord {
  std::size_t iter; // 0 = initial population
  double best_u;
  double mean_u;
  DesignVector best_x;
  double elapsed_s;
};

struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  DesignVector best_x{};
  double best_u = std::numeric_limits<double>::infinity();
  std::uint64_t backend_calls = 0;
  bool converged = false;
};

namespace detail {

class TraceBuilder {
 public:
  explicit TraceBuilder(const FitnessBackend& backend)
      : start_(std::chrono::steady_clock::now()), calls0_(backend.calls()), backend_(backend) {}

  void record(std::size_t iter, std::span<const double> fitness, const DesignVector& best_x,
              double best_u) {
    const double mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) /
                        static_cast<double>(fitness.size());
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    trace_.iterations.push_back({iter, best_u, mean, best_x, t});
    best_.push_back(best_u);
    trace_.best_x = best_x;
    trace_.best_u = best_u;
  }

  std::span<const double> best_history() const { return best_; }

  OptimizationTrace finish(bool converged) {
    trace_.backend_calls = backend_.calls() - calls0_;
    trace_.converged = converged;
    return std::move(trace_);
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::uint64_t calls0_;
  const FitnessBackend& backend_;
  OptimizationTrace trace_;
  std::vector<double> best_;
};

inline DesignVector random_point(const DesignSpace& space, Rng& rng) {
  DesignVector x;
  for (std::size_t k = 0; k < kDesignDim; ++k) x[k] = uniform(rng, space.lower[k], space.upper[k]);
  return space.snap(x);
}

inline std::size_t argbest(std::span<const double> f, std::span<const DesignVector> x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (better(f[i], x[i], f[best], x[best])) best = i;
  return best;
}

}  // namespace detail

/// Real-coded GA: tournament selection, blend crossover, Gaussian mutation,
/// elitism. Candidates live on the continuous-mode precision grid.
inline OptimizationTrace ga_optimize(const DesignSpace& space, const FitnessBackend& backend,
                                     const OptimizerConfig& cfg) {
  const auto& g = cfg.ga;
  if (g.population < 2 || g.tournament < 1 || g.elitism >= g.population)
    throw std::invalid_argument("ga_optimize: invalid population settings");
  auto rng = make_stream(cfg.seed, "ga");
  detail::TraceBuilder tb(backend);

  std::vector<DesignVector> pop(g.population);
  for (auto& x : pop) x = detail::random_point(space, rng);
  std::vector<double> fit = backend.evaluate(pop, cfg.jobs);
  auto b = detail::argbest(fit, pop);
  tb.record(0, fit, pop[b], fit[b]);

  auto tournament = [&]() -> const DesignVector& {
    std::size_t w = uniform_index(rng, pop.size());
    for (std::size_t t = 1; t < g.tournament; ++t) {
      const std::size_t c = uniform_index(rng, pop.size());
      if (better(fit[c], pop[c], fit[w], pop[w])) w = c;
    }
    return pop[w];
  };

  bool converged = false;
  for (std::size_t iter = 1; iter <= cfg.stop.max_iterations; ++iter) {
    std::vector<std::size_t> rank(pop.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(),
              [&](std::size_t i, std::size_t j) { return better(fit[i], pop[i], fit[j], pop[j]); });

    std::vector<DesignVector> next;
    std::vector<double> next_fit;
    for (std::size_t e = 0; e < g.elitism; ++e) {
      next.push_back(pop[rank[e]]);
      next_fit.push_back(fit[rank[e]]);
    }
    std::vector<DesignVector> children;
    while (next.size() + children.size() < g.population) {
      DesignVector c1 = tournament(), c2 = tournament();
      if (uniform01(rng) < g.crossover_prob) {
        for (std::size_t k = 0; k < kDesignDim; ++k) {
          const double lo = std::min(c1[k], c2[k]), hi = std::max(c1[k], c2[k]);
          const double ext = g.blend_alpha * (hi - lo);
          c1[k] = uniform(rng, lo - ext, hi + ext);
          c2[k] = uniform(rng, lo - ext, hi + ext);
        }
      }
      for (auto* c : {&c1, &c2})
        for (std::size_t k = 0; k < kDesignDim; ++k)
          if (uniform01(rng) < g.mutation_prob)
            (*c)[k] += g.mutation_scale * space.range(k) * standard_normal(rng);
      children.push_back(space.snap(c1));
      if (next.size() + children.size() < g.population) children.push_back(space.snap(c2));
    }
    const auto child_fit = backend.evaluate(children, cfg.jobs);
    next.insert(next.end(), children.begin(), children.end());
    next_fit.insert(next_fit.end(), child_fit.begin(), child_fit.end());
    pop = std::move(next);
    fit = std::move(next_fit);

    b = detail::argbest(fit, pop);
    tb.record(iter, fit, pop[b], fit[b]);
    if (cfg.stop.converged(tb.best_history())) {
      converged = true;
      break;
    }
  }
  return tb.finish(converged);
}

/// Global-best PSO with inertia, per-variable velocity clamping and
/// reflecting walls. Particles start at rest.
inline OptimizationTrace pso_optimize(const DesignSpace& space, const FitnessBackend& backend,
                                      const OptimizerConfig& cfg) {
  const auto& p = cfg.pso;
  if (p.swarm < 1) throw std::invalid_argument("pso_optimize: empty swarm");
  auto rng = make_stream(cfg.seed, "pso");
  detail::TraceBuilder tb(backend);

  std::vector<DesignVector> x(p.swarm), v(p.swarm, DesignVector{});
  for (auto& xi : x) xi = detail::random_point(space, rng);
  std::vector<double> fit = backend.evaluate(x, cfg.jobs);
  std::vector<DesignVector> pbest = x;
  std::vector<double> pbest_f = fit;
  auto gi = detail::argbest(pbest_f, pbest);
  DesignVector gbest = pbest[gi];
  double gbest_f = pbest_f[gi];
  tb.record(0, fit, gbest, gbest_f);

  bool converged = false;
  for (std::size_t iter = 1; iter <= cfg.stop.max_iterations; ++iter) {
    for (std::size_t i = 0; i < p.swarm; ++i) {
      for (std::size_t k = 0; k < kDesignDim; ++k) {
        const double vmax = p.velocity_clamp * space.range(k);
        const double r1 = uniform01(rng), r2 = uniform01(rng);
        double vk = p.inertia * v[i][k] + p.cognitive * r1 * (pbest[i][k] - x[i][k]) +
                    p.social * r2 * (gbest[k] - x[i][k]);
        vk = std::clamp(vk, -vmax, vmax);
        double xk = x[i][k] + vk;
        if (xk > space.upper[k]) {
          xk = space.upper[k] - (xk - space.upper[k]);
          vk = -vk;
        } else if (xk < space.lower[k]) {
          xk = space.lower[k] + (space.lower[k] - xk);
          vk = -vk;
        }
        x[i][k] = xk;
        v[i][k] = vk;
      }
      x[i] = space.snap(x[i]);
    }
    fit = backend.evaluate(x, cfg.jobs);
    for (std::size_t i = 0; i < p.swarm; ++i) {
      if (better(fit[i], x[i], pbest_f[i], pbest[i])) {
        pbest[i] = x[i];
        pbest_f[i] = fit[i];
      }
      if (better(pbest_f[i], pbest[i], gbest_f, gbest)) {
        gbest = pbest[i];
        gbest_f = pbest_f[i];
      }
    }
    tb.record(iter, fit, gbest, gbest_f);
    if (cfg.stop.converged(tb.best_history())) {
      converged = true;
      break;
    }
  }
  return tb.finish(converged);
}

/// Re-evaluates a candidate with the exact solver.
inline DistributionResult verify_candidate(const DesignVector& x, const JointConfig& cfg,
                                           double target_N = kDefaultTargetLoadN,
                                           const RampConfig& ramp = {}) {
  return solve_distribution(cfg, to_params(x), target_N, ramp);
}

}  // namespace boltshare
