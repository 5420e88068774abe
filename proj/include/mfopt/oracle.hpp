#pragma once

// Brute-force cross-checks of the synthesis: a backward dynamic-programming
// value function on a (t, m) grid, twin simulations at dispersal points and
// an enumeration over the admissible control structures.

#include "mfopt/model.hpp"
#include "mfopt/numerics.hpp"
#include "mfopt/simulate.hpp"
#include "mfopt/synthesis.hpp"

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfopt {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DpGridParams {
  std::size_t n_t = 4001;
  std::size_t n_m = 2001;
  double m_min = 1e-3;
  double m_max = 60.0;
  std::size_t store_every = 0;          // 0: about 400 stored time levels
  std::vector<double> candidates;       // empty: {−1, +1} plus ū when the arc is active
  std::optional<double> m0_max;         // largest tested initial mass, for the reach check

  /// Both spacings halved.
  DpGridParams refined() const {
    DpGridParams p = *this;
    p.n_t = 2 * n_t - 1;
    p.n_m = 2 * n_m - 1;
    p.store_every = 2 * effective_store_every();
    return p;
  }

  std::size_t effective_store_every() const {
    if (store_every > 0) return store_every;
    return std::max<std::size_t>(1, (n_t - 1 + 399) / 400);
  }
};

/// V(t_k, m_j) on stored time levels together with the maximising control.
struct ValueGrid {
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<double> m_nodes;
  std::vector<double> candidates;
  std::vector<std::size_t> stored_steps;  // ascending time-step indices
  std::vector<std::vector<double>> V;     // per stored level
  std::vector<std::vector<std::int8_t>> policy;

  double time_of_level(std::size_t level) const {
    return static_cast<double>(stored_steps[level]) * dt;
  }

  std::size_t level_at(double t) const {
    for (std::size_t l = 0; l < stored_steps.size(); ++l) {
      if (std::abs(time_of_level(l) - t) <= 1e-9 * std::max(1.0, horizon)) return l;
    }
    std::ostringstream os;
    os << "time " << t << " is not a stored level of the value grid";
    throw GridError(os.str());
  }

  double interpolate(const std::vector<double>& values, double m) const {
    m = std::clamp(m, m_nodes.front(), m_nodes.back());
    if (m_nodes.size() < 4) {
      auto it = std::upper_bound(m_nodes.begin(), m_nodes.end(), m);
      if (it == m_nodes.end()) return values.back();
      const auto j = static_cast<std::size_t>(it - m_nodes.begin()) - 1;
      const double w = (m - m_nodes[j]) / (m_nodes[j + 1] - m_nodes[j]);
      return (1 - w) * values[j] + w * values[j + 1];
    }
    auto x = m_nodes;
    auto y = values;
    boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
    return spline(m);
  }

  /// V(t, m) by monotone-cubic interpolation in m on a stored level.
  double value(double t, double m) const { return interpolate(V[level_at(t)], m); }

  /// Policy control at the grid node (level, j).
  double policy_at(std::size_t level, std::size_t j) const {
    return candidates[static_cast<std::size_t>(policy[level][j])];
  }
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Backward recursion V_k(m) = max_u [u g(m) Δt + V_{k+1}(m + Δt (f− + u f+))]
/// with V_N = 0 and explicit Euler transitions.
inline ValueGrid solve_dp(const FoulingModel& model, const SingularArc& arc, double horizon,
                          const DpGridParams& params = {}) {
  if (params.n_t < 2 || params.n_m < 2) throw GridError("grid needs n_t, n_m >= 2");
  if (!(params.m_min > 0.0) || !(params.m_max > params.m_min)) {
    throw GridError("grid needs 0 < m_min < m_max");
  }
  if (params.m0_max) {
    const double reach = *params.m0_max + horizon * model.f1(0.0);
    if (params.m_max < reach) {
      std::ostringstream os;
      os << "m_max=" << params.m_max << " below reachable mass " << reach
         << "; use m_max >= " << std::ceil(reach);
      throw GridError(os.str());
    }
  }

  ValueGrid grid;
  grid.horizon = horizon;
  grid.dt = horizon / static_cast<double>(params.n_t - 1);
  grid.m_nodes = log_spaced(params.m_min, params.m_max, params.n_m);
  if (!params.candidates.empty()) {
    grid.candidates = params.candidates;
  } else {
    grid.candidates = {-1.0, 1.0};
    if (arc.active()) grid.candidates.push_back(arc.u_bar);
  }
  for (double u : grid.candidates) detail::check_control(u);

  const std::size_t n_m = params.n_m;
  const std::size_t n_u = grid.candidates.size();
  const double dt = grid.dt;

  // Transition targets and running payoffs are time-independent.
  std::vector<double> target(n_m * n_u), payoff(n_m * n_u);
  for (std::size_t j = 0; j < n_m; ++j) {
    const double m = grid.m_nodes[j];
    for (std::size_t c = 0; c < n_u; ++c) {
      const double u = grid.candidates[c];
      target[j * n_u + c] =
          std::clamp(m + dt * mass_rate(model, m, u), params.m_min, params.m_max);
      payoff[j * n_u + c] = u * model.g(m) * dt;
    }
  }

  const std::size_t every = params.effective_store_every();
  auto stored = [&](std::size_t k) { return k % every == 0 || k == params.n_t - 1 || k == 0; };

  std::vector<double> next(n_m, 0.0), cur(n_m, 0.0);
  std::vector<std::int8_t> pol(n_m, 0);
  const auto one_index = static_cast<std::int8_t>(
      std::find(grid.candidates.begin(), grid.candidates.end(), 1.0) - grid.candidates.begin());

  std::vector<std::size_t> steps_desc;
  std::vector<std::vector<double>> V_desc;
  std::vector<std::vector<std::int8_t>> P_desc;
  const std::size_t last = params.n_t - 1;
  steps_desc.push_back(last);
  V_desc.push_back(next);
  P_desc.push_back(std::vector<std::int8_t>(n_m, one_index < static_cast<std::int8_t>(n_u)
                                                     ? one_index
                                                     : std::int8_t{0}));

  for (std::size_t k = last; k-- > 0;) {
    if (n_m >= 4) {
      auto x = grid.m_nodes;
      auto y = next;
      boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
      for (std::size_t j = 0; j < n_m; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        std::int8_t arg = 0;
        for (std::size_t c = 0; c < n_u; ++c) {
          const double v = payoff[j * n_u + c] + spline(target[j * n_u + c]);
          if (v > best) {
            best = v;
            arg = static_cast<std::int8_t>(c);
          }
        }
        cur[j] = best;
        pol[j] = arg;
      }
    } else {
      for (std::size_t j = 0; j < n_m; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        std::int8_t arg = 0;
        for (std::size_t c = 0; c < n_u; ++c) {
          const double v = payoff[j * n_u + c] + grid.interpolate(next, target[j * n_u + c]);
          if (v > best) {
            best = v;
            arg = static_cast<std::int8_t>(c);
          }
        }
        cur[j] = best;
        pol[j] = arg;
      }
    }
    std::swap(cur, next);
    if (stored(k)) {
      steps_desc.push_back(k);
      V_desc.push_back(next);
      P_desc.push_back(pol);
    }
  }

  grid.stored_steps.assign(steps_desc.rbegin(), steps_desc.rend());
  grid.V.assign(V_desc.rbegin(), V_desc.rend());
  grid.policy.assign(P_desc.rbegin(), P_desc.rend());
  return grid;
}

// ---------------------------------------------------------------------------

struct InitialCondition {
  double t0;
  double m0;
};

struct ComparisonRow {
  double t0, m0;
  double J_feedback;
  double V_dp;
  double V_dp_fine;
  double gap;  // J_feedback − V_dp
  double tol_dp;
  bool pass;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double tol_dp = 0.0;
  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
  }
};

/// Richardson-style error bar for a first-order scheme: the coarse-grid error
/// is about twice the coarse/fine difference.
inline double estimate_tol_dp(const ValueGrid& coarse, const ValueGrid& fine,
                              const std::vector<InitialCondition>& ics) {
  double worst = 0.0;
  for (const auto& ic : ics) {
    worst = std::max(worst, std::abs(coarse.value(ic.t0, ic.m0) - fine.value(ic.t0, ic.m0)));
  }
  return 2.0 * worst;
}

inline ComparisonReport compare_feedback_vs_dp(const FeedbackLaw& law, const ValueGrid& coarse,
                                               const ValueGrid& fine,
                                               const std::vector<InitialCondition>& ics,
                                               const SimOptions& opts = {}) {
  if (std::abs(coarse.horizon - law.horizon()) > 1e-12 ||
      std::abs(fine.horizon - law.horizon()) > 1e-12) {
    throw DomainError("compare_feedback_vs_dp: horizon mismatch between grid and synthesis");
  }
  ComparisonReport rep;
  rep.tol_dp = estimate_tol_dp(coarse, fine, ics);
  for (const auto& ic : ics) {
    ComparisonRow row{};
    row.t0 = ic.t0;
    row.m0 = ic.m0;
    row.J_feedback = integrate_feedback(law, ic.m0, ic.t0, opts).total_cost;
    row.V_dp = coarse.value(ic.t0, ic.m0);
    row.V_dp_fine = fine.value(ic.t0, ic.m0);
    row.gap = row.J_feedback - row.V_dp;
    row.tol_dp = rep.tol_dp;
    row.pass = std::abs(row.gap) <= rep.tol_dp;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Convenience overload: solves the default grid and its refinement.
inline ComparisonReport compare_feedback_vs_dp(const FeedbackLaw& law,
                                               const std::vector<InitialCondition>& ics,
                                               DpGridParams params = {},
                                               const SimOptions& opts = {}) {
  for (const auto& ic : ics) params.m0_max = std::max(params.m0_max.value_or(0.0), ic.m0);
  const ValueGrid coarse = solve_dp(law.model(), law.arc(), law.horizon(), params);
  const ValueGrid fine = solve_dp(law.model(), law.arc(), law.horizon(), params.refined());
  return compare_feedback_vs_dp(law, coarse, fine, ics, opts);
}

/// Random admissible piecewise-constant schedule on [t0, T].
inline Schedule random_schedule(std::mt19937_64& rng, double t0, double T, double u_bar) {
  std::uniform_int_distribution<int> pieces_dist(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int pieces = pieces_dist(rng);
  std::vector<double> cuts;
  for (int i = 1; i < pieces; ++i) cuts.push_back(t0 + (T - t0) * unit(rng));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  Schedule s;
  auto draw = [&]() {
    const double r = unit(rng);
    if (r < 0.3) return -1.0;
    if (r < 0.6) return 1.0;
    if (r < 0.7) return u_bar;
    return -1.0 + 2.0 * unit(rng);
  };
  s.push_back({t0, draw()});
  for (double c : cuts)
    if (c > s.back().t_start) s.push_back({c, draw()});
  return s;
}

// ---------------------------------------------------------------------------

struct DispersalRow {
  double t, m;
  double J_plus;   // u = +1 to the horizon
  double J_minus;  // u = −1 into W, then the feedback law
  double diff;     // |J_plus − J_minus|
};

/// Twin simulations from points of the dispersal part of C.
inline std::vector<DispersalRow> dispersal_equality_check(const FeedbackLaw& law,
                                                          const std::vector<CurveSample>& points,
                                                          const SimOptions& opts = {}) {
  std::vector<DispersalRow> rows;
  for (const auto& p : points) {
    if (!p.on_curve() || p.kind != CurveKind::dispersal) {
      std::ostringstream os;
      os << "point (" << p.T_tilde << ", " << p.m_tilde << ") is not on the dispersal locus";
      throw DomainError(os.str());
    }
    const double t = p.T_tilde;
    const double m = p.m_tilde;
    const auto plus = integrate_constant(law.model(), 1.0, m, t, law.horizon(), opts);
    const auto minus = integrate_feedback(law, m, t, opts, Regime::backwash);
    rows.push_back({t, m, plus.total_cost, minus.total_cost,
                    std::abs(plus.total_cost - minus.total_cost)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

enum class StrategyFamily { filtration_only, backwash_then_filtration, approach_dwell_filtration };

inline const char* to_string(StrategyFamily f) {
  switch (f) {
    case StrategyFamily::filtration_only: return "+1";
    case StrategyFamily::backwash_then_filtration: return "-1,+1";
    case StrategyFamily::approach_dwell_filtration: return "approach,u_bar,+1";
  }
  return "?";
}

struct EnumerationResult {
  double best_cost = -std::numeric_limits<double>::infinity();
  StrategyFamily family = StrategyFamily::filtration_only;
  Schedule schedule;
};

/// Searches the switch times of the schedules (+1), (−1, +1) and
/// (bang to m̄, dwell, +1) by a grid scan followed by golden-section
/// refinement.
inline EnumerationResult strategy_enumeration(const FoulingModel& model, const SingularArc& arc,
                                              double horizon, double t0, double m0,
                                              int k_switches = 2, std::size_t n_scan = 200) {
  if (k_switches < 0 || k_switches > 2) throw DomainError("k_switches must be 0, 1 or 2");
  SimOptions opts;
  opts.max_step = std::max(horizon / 50.0, 1e-3);
  const double T = horizon;

  EnumerationResult best;
  auto consider = [&](double cost, StrategyFamily fam, Schedule sched) {
    if (cost > best.best_cost) {
      best.best_cost = cost;
      best.family = fam;
      best.schedule = std::move(sched);
    }
  };

  consider(integrate_constant(model, 1.0, m0, t0, T, opts).total_cost,
           StrategyFamily::filtration_only, {{t0, 1.0}});

  auto scan_refine = [&](auto&& cost_of, double lo, double hi) {
    if (!(hi > lo)) return std::make_pair(lo, cost_of(lo));
    std::vector<double> grid(n_scan + 1), vals(n_scan + 1);
    std::size_t arg = 0;
    for (std::size_t i = 0; i <= n_scan; ++i) {
      grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_scan);
      vals[i] = cost_of(grid[i]);
      if (vals[i] > vals[arg]) arg = i;
    }
    const double a = grid[arg == 0 ? 0 : arg - 1];
    const double b = grid[std::min(arg + 1, n_scan)];
    auto refined = golden_maximize(cost_of, a, b, 1e-10 * std::max(1.0, T));
    if (vals[arg] > refined.second) return std::make_pair(grid[arg], vals[arg]);
    return refined;
  };

  if (k_switches >= 1) {
    auto cost_of = [&](double s) {
      if (s <= t0) return integrate_constant(model, 1.0, m0, t0, T, opts).total_cost;
      return integrate_state(model, Schedule{{t0, -1.0}, {s, 1.0}}, m0, t0, T, opts).total_cost;
    };
    const auto [s, c] = scan_refine(cost_of, t0, T);
    consider(c, StrategyFamily::backwash_then_filtration, {{t0, -1.0}, {s, 1.0}});
  }

  if (k_switches >= 2 && arc.active()) {
    // most rapid approach to m̄ (u = −1 from above, +1 from below), then dwell
    const double approach = m0 >= arc.m_bar ? -1.0 : 1.0;
    double t_hit = t0;
    double J_hit = 0.0;
    if (std::abs(m0 - arc.m_bar) > Tolerances::band_sing) {
      Trajectory tr;
      const auto end = detail::run_segment(
          model, approach, t0, m0, 0.0, T,
          {[&arc, approach](double, double m) { return -approach * (m - arc.m_bar); }}, opts,
          tr.nodes);
      if (end.event != 0) return best;
      t_hit = end.t;
      J_hit = end.J;
    }
    const double dwell_rate = arc.u_bar * model.g(arc.m_bar);
    auto cost_of = [&](double s) {
      const double tail =
          s < T ? integrate_constant(model, 1.0, arc.m_bar, s, T, opts).total_cost : 0.0;
      return J_hit + dwell_rate * (s - t_hit) + tail;
    };
    const auto [s, c] = scan_refine(cost_of, t_hit, T);
    Schedule sched;
    if (t_hit > t0) sched.push_back({t0, approach});
    sched.push_back({t_hit, arc.u_bar});
    if (s <= t_hit) {
      sched.back().u = 1.0;
    } else if (s < T) {
      sched.push_back({s, 1.0});
    }
    consider(c, StrategyFamily::approach_dwell_filtration, std::move(sched));
  }
  return best;
}

}  // namespace mfopt
