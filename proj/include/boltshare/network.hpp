#pragma once

// Displacement-controlled incremental solve of the single-lap joint as a 1D
// spring ladder: two plates discretized at the bolt stations, one four-phase
// bolt element joining the two stations of each bolt.
//
// Node numbering: 0..n-1 are the loaded-plate stations (0 nearest the load),
// n..2n-1 the fixed-plate stations (2n-1 nearest the grip). The load node and
// the ground node are prescribed and carry no unknown.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boltshare/joint_model.hpp"

namespace boltshare {

enum class Phase : int { stick = 1, interface_slip = 2, global_slip = 3, bearing = 4 };

enum class EventMode {
  substep, ///< split increments at knee crossings
  fixed,   ///< switch phases only at the end of each increment
};

/// Stiffness given to plateau elements in the solve, as a fraction of K1.
inline constexpr double kPlateauRegularization = 1.0e-8;

inline constexpr double kDefaultTargetLoadN = 30000.0;

struct RampConfig {
  double increment_mm = 0.005;
  double total_mm = 3.0;
  EventMode mode = EventMode::substep;
  /// Halt once the total load reaches this value (saves work for fitness calls).
  std::optional<double> stop_at_load_N;

  void validate() const {
    if (!(increment_mm > 0 && std::isfinite(increment_mm)))
      throw std::invalid_argument("ramp: increment must be positive");
    if (!(total_mm > 0 && std::isfinite(total_mm)))
      throw std::invalid_argument("ramp: total displacement must be positive");
  }
};

inline constexpr int kLoadNode = -1;
inline constexpr int kGroundNode = -2;

struct PlateElement {
  int from;
  int to;
  double stiffness;
};

struct BoltElement {
  int plate_a; // station on the loaded plate
  int plate_b; // station on the fixed plate
  StiffnessSet props;
};

struct SpringNetwork {
  int n_bolts = 0;
  std::vector<PlateElement> plates; // between stations of the same plate
  PlateElement load_end{};          // load node -> first loaded-plate station
  PlateElement ground_end{};        // last fixed-plate station -> ground
  std::vector<BoltElement> bolts;

  int dof() const { return 2 * n_bolts; }
};

struct BoltElementState {
  Phase phase = Phase::stick;
  double slip_mm = 0.0;  // relative displacement across the element
  double force_N = 0.0;  // transferred force, excluding regularization leakage
  Knees knees{};
  double tangent = 0.0;  // true tangent stiffness of the current phase
};

struct SolverState {
  double u_mm = 0.0;
  double load_N = 0.0;
  std::vector<BoltElementState> bolts;
};

struct HistoryRecord {
  double u_mm;
  double load_N;
  std::vector<double> bolt_loads_N;
  std::vector<Phase> phases;
  bool knee_event = false;
};

struct LoadHistory {
  std::vector<HistoryRecord> records;

  double max_load() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.load_N);
    return m;
  }
};

struct DistributionResult {
  double target_load_N;
  double u_mm; // end displacement at which the target is reached
  std::vector<double> bolt_loads_N;
  std::vector<double> ratios;
  double unevenness;
};

class TargetLoadNotReached : public std::runtime_error {
 public:
  TargetLoadNotReached(double target, double reached)
      : std::runtime_error("target load " + std::to_string(target) +
                           " N not reached (max " + std::to_string(reached) + " N)"),
        target_N(target),
        reached_N(reached) {}
  double target_N;
  double reached_N;
};

/// (max - min) / (max + min) over the bolt loads; 0 for all-equal loads.
inline double unevenness(std::span<const double> loads) {
  if (loads.empty()) throw std::invalid_argument("unevenness: no loads");
  const auto [lo, hi] = std::minmax_element(loads.begin(), loads.end());
  const double sum = *hi + *lo;
  if (sum == 0.0) return 0.0;
  return (*hi - *lo) / sum;
}

inline double phase_tangent(const StiffnessSet& s, Phase p) {
  switch (p) {
    case Phase::stick: return s.bolt.stick;
    case Phase::interface_slip: return s.bolt.interface_slip;
    case Phase::global_slip: return s.bolt.global_slip;
    case Phase::bearing: return s.bolt.bearing;
  }
  return 0.0;
}

/// Stiffness used when assembling the tangent system.
inline double solve_stiffness(const StiffnessSet& s, Phase p) {
  return p == Phase::global_slip ? kPlateauRegularization * s.bolt.stick : phase_tangent(s, p);
}

/// Highest phase whose knee has been reached by `slip`.
inline Phase phase_for_slip(double slip, const Knees& k) {
  if (slip >= k.c) return Phase::bearing;
  if (slip >= k.b) return Phase::global_slip;
  if (slip >= k.a) return Phase::interface_slip;
  return Phase::stick;
}

inline std::optional<double> next_knee(const Knees& k, Phase p) {
  switch (p) {
    case Phase::stick: return k.a;
    case Phase::interface_slip: return k.b;
    case Phase::global_slip: return k.c;
    case Phase::bearing: return std::nullopt;
  }
  return std::nullopt;
}

inline SpringNetwork build_network(const JointConfig& cfg, const BoltParams& params) {
  const int n = cfg.geometry.n_bolts;
  params.validate(n);
  SpringNetwork net;
  net.n_bolts = n;
  const double kp = plate_stiffness(cfg.geometry, cfg.laminate);
  net.load_end = {kLoadNode, 0, kp};
  net.ground_end = {2 * n - 1, kGroundNode, kp};
  for (int i = 0; i + 1 < n; ++i) net.plates.push_back({i, i + 1, kp});
  for (int i = 0; i + 1 < n; ++i) net.plates.push_back({n + i, n + i + 1, kp});
  for (int i = 0; i < n; ++i) {
    net.bolts.push_back({i, n + i,
                         stiffness_set(cfg, params.clearances_mm[static_cast<std::size_t>(i)],
                                       params.torques_Nm[static_cast<std::size_t>(i)])});
  }
  return net;
}

inline SolverState initial_state(const SpringNetwork& net) {
  SolverState st;
  for (const auto& b : net.bolts) {
    BoltElementState e;
    e.knees = b.props.knees;
    e.phase = phase_for_slip(0.0, e.knees);
    e.tangent = phase_tangent(b.props, e.phase);
    st.bolts.push_back(e);
  }
  return st;
}

/// Rates per unit end displacement under the current tangent stiffnesses.
struct TangentSolution {
  std::vector<double> nodal;
  std::vector<double> slip_rate;
  double load_rate; // force through the joint, including plateau leakage
};

inline TangentSolution tangent_solve(const SpringNetwork& net,
                                     std::span<const BoltElementState> states) {
  const int dof = net.dof();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dof, dof);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dof);

  auto stamp = [&](int p, int q, double k) {
    if (p >= 0) K(p, p) += k;
    if (q >= 0) K(q, q) += k;
    if (p >= 0 && q >= 0) {
      K(p, q) -= k;
      K(q, p) -= k;
    }
    if (p == kLoadNode && q >= 0) f(q) += k;
    if (q == kLoadNode && p >= 0) f(p) += k;
  };

  stamp(net.load_end.from, net.load_end.to, net.load_end.stiffness);
  stamp(net.ground_end.from, net.ground_end.to, net.ground_end.stiffness);
  for (const auto& e : net.plates) stamp(e.from, e.to, e.stiffness);
  for (std::size_t i = 0; i < net.bolts.size(); ++i) {
    const auto& b = net.bolts[i];
    stamp(b.plate_a, b.plate_b, solve_stiffness(b.props, states[i].phase));
  }

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw std::logic_error("tangent_solve: stiffness matrix not positive definite");
  const Eigen::VectorXd x = llt.solve(f);

  TangentSolution sol;
  sol.nodal.assign(x.data(), x.data() + dof);
  for (const auto& b : net.bolts) sol.slip_rate.push_back(x(b.plate_a) - x(b.plate_b));
  // read at the ground end: 1 - x(0) cancels badly when the joint is soft
  sol.load_rate = net.ground_end.stiffness * x(net.ground_end.from);
  return sol;
}

namespace detail {

inline HistoryRecord snapshot(const SolverState& st, bool event) {
  HistoryRecord r{st.u_mm, st.load_N, {}, {}, event};
  for (const auto& b : st.bolts) {
    r.bolt_loads_N.push_back(b.force_N);
    r.phases.push_back(b.phase);
  }
  return r;
}

inline void apply_increment(const SpringNetwork& net, SolverState& st,
                            const TangentSolution& sol, double du) {
  double leak = 0.0;
  for (std::size_t i = 0; i < st.bolts.size(); ++i) {
    auto& b = st.bolts[i];
    const double dslip = sol.slip_rate[i] * du;
    b.slip_mm += dslip;
    b.force_N += b.tangent * dslip;
    if (b.phase == Phase::global_slip)
      leak += solve_stiffness(net.bolts[i].props, b.phase) * dslip;
  }
  st.load_N += sol.load_rate * du - leak;
  st.u_mm += du;
}

/// Raise phases to match the current slips; returns true if any changed.
inline bool update_phases(const SpringNetwork& net, SolverState& st) {
  bool changed = false;
  for (std::size_t i = 0; i < st.bolts.size(); ++i) {
    auto& b = st.bolts[i];
    const Phase p = std::max(b.phase, phase_for_slip(b.slip_mm, b.knees));
    if (p != b.phase) {
      b.phase = p;
      b.tangent = phase_tangent(net.bolts[i].props, p);
      changed = true;
    }
  }
  return changed;
}

}  // namespace detail

/// Applies an end-displacement increment `du` and returns the history records
/// produced: one per knee event (substep mode) plus one at the end of the step.
inline std::vector<HistoryRecord> advance(const SpringNetwork& net, SolverState& st, double du,
                                          EventMode mode) {
  if (!(du > 0)) throw std::invalid_argument("advance: increment must be positive");
  std::vector<HistoryRecord> out;
  const double u_end = st.u_mm + du;

  if (mode == EventMode::fixed) {
    const auto sol = tangent_solve(net, st.bolts);
    detail::apply_increment(net, st, sol, du);
    const bool event = detail::update_phases(net, st);
    st.u_mm = u_end;
    out.push_back(detail::snapshot(st, event));
    return out;
  }

  double remaining = du;
  while (remaining > 0.0) {
    const auto sol = tangent_solve(net, st.bolts);
    std::vector<double> to_knee(st.bolts.size(), std::numeric_limits<double>::infinity());
    double step = remaining;
    for (std::size_t i = 0; i < st.bolts.size(); ++i) {
      const auto knee = next_knee(st.bolts[i].knees, st.bolts[i].phase);
      const double rate = sol.slip_rate[i];
      if (!knee || !(rate > 0.0)) continue;
      to_knee[i] = std::max(0.0, (*knee - st.bolts[i].slip_mm) / rate);
      step = std::min(step, to_knee[i]);
    }
    const bool hits_knee = step < remaining;
    detail::apply_increment(net, st, sol, step);
    remaining -= step;
    if (hits_knee) {
      // Land exactly on the knee for the element(s) that triggered the split.
      for (std::size_t i = 0; i < st.bolts.size(); ++i) {
        if (to_knee[i] > step) continue;
        auto& b = st.bolts[i];
        b.slip_mm = std::max(b.slip_mm, *next_knee(b.knees, b.phase));
      }
    }
    const bool changed = detail::update_phases(net, st);
    if (remaining <= 0.0) {
      st.u_mm = u_end;
      out.push_back(detail::snapshot(st, changed));
    } else if (changed) {
      out.push_back(detail::snapshot(st, true));
    }
  }
  return out;
}

inline LoadHistory run(const SpringNetwork& net, const RampConfig& ramp) {
  ramp.validate();
  SolverState st = initial_state(net);
  LoadHistory h;
  h.records.push_back(detail::snapshot(st, false));
  const auto steps = static_cast<long>(std::ceil(ramp.total_mm / ramp.increment_mm - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double target = std::min(static_cast<double>(k) * ramp.increment_mm, ramp.total_mm);
    if (!(target > st.u_mm)) continue;
    auto recs = advance(net, st, target - st.u_mm, ramp.mode);
    h.records.insert(h.records.end(), std::make_move_iterator(recs.begin()),
                     std::make_move_iterator(recs.end()));
    if (ramp.stop_at_load_N && st.load_N >= *ramp.stop_at_load_N) break;
  }
  return h;
}

inline LoadHistory run(const JointConfig& cfg, const BoltParams& params,
                       const RampConfig& ramp = {}) {
  cfg.validate();
  return run(build_network(cfg, params), ramp);
}

/// Bolt loads at total load `target_N`, interpolated linearly between the two
/// bracketing history records.
inline DistributionResult distribution_at_load(const LoadHistory& history, double target_N) {
  if (!(target_N > 0)) throw std::invalid_argument("distribution_at_load: target must be positive");
  const auto& rs = history.records;
  auto it = std::find_if(rs.begin(), rs.end(),
                         [&](const HistoryRecord& r) { return r.load_N >= target_N; });
  if (it == rs.end()) throw TargetLoadNotReached(target_N, history.max_load());

  DistributionResult d{target_N, it->u_mm, it->bolt_loads_N, {}, 0.0};
  if (it != rs.begin()) {
    const auto& r0 = *std::prev(it);
    const auto& r1 = *it;
    const double alpha = (target_N - r0.load_N) / (r1.load_N - r0.load_N);
    d.u_mm = r0.u_mm + alpha * (r1.u_mm - r0.u_mm);
    for (std::size_t i = 0; i < d.bolt_loads_N.size(); ++i)
      d.bolt_loads_N[i] = r0.bolt_loads_N[i] + alpha * (r1.bolt_loads_N[i] - r0.bolt_loads_N[i]);
  }
  double total = 0.0;
  for (double f : d.bolt_loads_N) total += f;
  for (double f : d.bolt_loads_N) d.ratios.push_back(f / total);
  d.unevenness = unevenness(d.bolt_loads_N);
  return d;
}

/// Runs the ramp up to `target_N` and reports the distribution there.
inline DistributionResult solve_distribution(const JointConfig& cfg, const BoltParams& params,
                                             double target_N = kDefaultTargetLoadN,
                                             RampConfig ramp = {}) {
  ramp.stop_at_load_N = target_N;
  return distribution_at_load(run(cfg, params, ramp), target_N);
}

}  // namespace boltshare
