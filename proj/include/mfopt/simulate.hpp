#pragma once

// Forward simulation of ṁ = f− + u f+ with the running payoff J = ∫ u g,
// backward integration of the adjoint, and a Pontryagin audit of the result.

#include "mfopt/model.hpp"
#include "mfopt/numerics.hpp"
#include "mfopt/synthesis.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mfopt {

enum class EventKind { switch_up, switch_down, hit_singular, leave_singular, hit_curve };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::switch_up: return "switch_up";
    case EventKind::switch_down: return "switch_down";
    case EventKind::hit_singular: return "hit_singular";
    case EventKind::leave_singular: return "leave_singular";
    case EventKind::hit_curve: return "hit_curve";
  }
  return "?";
}

/// One sample of a run. `u` is the control applied on [t, t_next); at an
/// event two nodes share the same t, the first closing the old segment.
struct Node {
  Node() = default;
  Node(double t_, double m_, double u_, double J_) : t(t_), m(m_), u(u_), J(J_) {}

  double t = 0.0;
  double m = 0.0;
  double u = 0.0;
  double J = 0.0;
  std::optional<double> lambda;
  std::optional<double> phi;
  std::optional<double> H;
};

struct Event {
  double t;
  EventKind kind;
  double m;
};

struct Trajectory {
  std::vector<Node> nodes;
  std::vector<Event> events;
  double total_cost = 0.0;

  double t_end() const { return nodes.back().t; }
  double m_end() const { return nodes.back().m; }
  bool has_adjoint() const { return !nodes.empty() && nodes.front().lambda.has_value(); }
  bool has_event(EventKind k) const {
    return std::any_of(events.begin(), events.end(), [k](const Event& e) { return e.kind == k; });
  }
  const Event* first_event(EventKind k) const {
    for (const auto& e : events)
      if (e.kind == k) return &e;
    return nullptr;
  }
};

struct SimOptions {
  double rel_tol = Tolerances::ode_rel;
  double abs_tol = Tolerances::ode_abs;
  double max_step = 0.02;  // also the maximal node spacing
  double event_tol = Tolerances::event_time;
};

/// Piecewise-constant control: u = rows[i].u on [rows[i].t_start, rows[i+1].t_start).
struct ScheduleRow {
  double t_start;
  double u;
};
using Schedule = std::vector<ScheduleRow>;

using FeedbackFn = std::function<double(double t, double m)>;

namespace detail {

using OdeState = std::array<double, 2>;  // (m, J)

/// Event function; fires on the first transition from > 0 to <= 0.
using EventFn = std::function<double(double t, double m)>;

struct SegmentEnd {
  double t;
  double m;
  double J;
  int event = -1;
};

inline void check_control(double u) {
  if (!(u >= -1.0 && u <= 1.0)) {
    std::ostringstream os;
    os << "control value " << u << " outside [-1, 1]";
    throw DomainError(os.str());
  }
}

/// Integrates one constant-control segment from (t0, m0, J0) up to t_end or
/// the first armed event, appending nodes (the start node included, the
/// closing node included).
inline SegmentEnd run_segment(const FoulingModel& model, double u, double t0, double m0,
                              double J0, double t_end, const std::vector<EventFn>& events,
                              const SimOptions& opts, std::vector<Node>& nodes) {
  namespace odeint = boost::numeric::odeint;
  check_control(u);
  nodes.push_back({t0, m0, u, J0});
  if (t_end <= t0) return {t0, m0, J0, -1};

  auto rhs = [&model, u](const OdeState& x, OdeState& dxdt, double /*t*/) {
    dxdt[0] = mass_rate(model, x[0], u);
    dxdt[1] = u * model.g(x[0]);
  };

  std::vector<char> armed(events.size(), 0);
  for (std::size_t k = 0; k < events.size(); ++k) armed[k] = events[k](t0, m0) > 0.0;

  auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, opts.max_step,
                                           odeint::runge_kutta_dopri5<OdeState>());
  const double span = t_end - t0;
  stepper.initialize(OdeState{m0, J0}, t0, std::min(opts.max_step, 1e-3 * std::max(span, 1e-3)));

  auto state_at = [&stepper](double t) {
    OdeState x;
    stepper.calc_state(t, x);
    return x;
  };

  double t_prev = t0;
  while (true) {
    try {
      stepper.do_step(rhs);
    } catch (const std::exception& ex) {
      const auto& x = stepper.current_state();
      std::ostringstream os;
      os << "integrator step failure at t=" << stepper.current_time() << ", m=" << x[0] << ": "
         << ex.what();
      throw NumericError(os.str());
    }
    const double t_cur = std::min(stepper.current_time(), t_end);

    // Probe the step at node resolution so that events and nodes share a grid.
    const int pieces =
        std::max(1, static_cast<int>(std::ceil((t_cur - t_prev) / opts.max_step - 1e-9)));
    double t_left = t_prev;
    for (int p = 1; p <= pieces; ++p) {
      const double t_right = p == pieces ? t_cur : t_prev + (t_cur - t_prev) * p / pieces;
      const OdeState xr = state_at(t_right);
      if (xr[0] < 0.0) {
        std::ostringstream os;
        os << "state left the positive domain at t=" << t_right << " (m=" << xr[0] << ")";
        throw NumericError(os.str());
      }
      // earliest armed event in (t_left, t_right]
      int fired = -1;
      double t_fire = t_right;
      for (std::size_t k = 0; k < events.size(); ++k) {
        if (!armed[k]) {
          armed[k] = events[k](t_right, xr[0]) > 0.0;
          continue;
        }
        if (events[k](t_right, xr[0]) > 0.0) continue;
        double a = t_left, b = t_right;
        while (b - a > opts.event_tol * std::max(1.0, std::abs(b))) {
          const double mid = 0.5 * (a + b);
          if (mid <= a || mid >= b) break;
          if (events[k](mid, state_at(mid)[0]) > 0.0) a = mid;
          else b = mid;
        }
        if (fired < 0 || b < t_fire) {
          fired = static_cast<int>(k);
          t_fire = b;
        }
      }
      if (fired >= 0) {
        const OdeState xf = state_at(t_fire);
        nodes.push_back({t_fire, xf[0], u, xf[1]});
        return {t_fire, xf[0], xf[1], fired};
      }
      nodes.push_back({t_right, xr[0], u, xr[1]});
      t_left = t_right;
    }
    if (t_cur >= t_end) {
      const Node& last = nodes.back();
      return {last.t, last.m, last.J, -1};
    }
    t_prev = t_cur;
  }
}

inline EventKind change_kind(double from, double to) {
  return to > from ? EventKind::switch_up : EventKind::switch_down;
}

inline void finish(Trajectory& tr) {
  tr.total_cost = tr.nodes.empty() ? 0.0 : tr.nodes.back().J - tr.nodes.front().J;
}

}  // namespace detail

/// Open-loop simulation under a piecewise-constant schedule.
inline Trajectory integrate_state(const FoulingModel& model, const Schedule& schedule, double m0,
                                  double t0, double t1, const SimOptions& opts = {}) {
  if (!(m0 >= 0.0)) throw DomainError("initial mass must be non-negative");
  if (t1 < t0) throw DomainError("t_span must satisfy t0 <= t1");
  if (schedule.empty() || schedule.front().t_start > t0) {
    throw DomainError("schedule must define the control from t0 onwards");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    detail::check_control(schedule[i].u);
    if (i > 0 && !(schedule[i].t_start > schedule[i - 1].t_start)) {
      throw DomainError("schedule times must be strictly increasing");
    }
  }
  Trajectory tr;
  double t = t0, m = m0, J = 0.0;
  std::size_t i = 0;
  while (i + 1 < schedule.size() && schedule[i + 1].t_start <= t0) ++i;
  std::optional<double> prev_u;
  while (true) {
    const double u = schedule[i].u;
    if (prev_u && *prev_u != u) tr.events.push_back({t, detail::change_kind(*prev_u, u), m});
    const double seg_end = i + 1 < schedule.size() ? std::min(schedule[i + 1].t_start, t1) : t1;
    const auto end = detail::run_segment(model, u, t, m, J, seg_end, {}, opts, tr.nodes);
    t = end.t;
    m = end.m;
    J = end.J;
    if (t >= t1 || i + 1 >= schedule.size()) break;
    prev_u = u;
    ++i;
  }
  detail::finish(tr);
  return tr;
}

/// Constant control over [t0, t1].
inline Trajectory integrate_constant(const FoulingModel& model, double u, double m0, double t0,
                                     double t1, const SimOptions& opts = {}) {
  return integrate_state(model, Schedule{{t0, u}}, m0, t0, t1, opts);
}

/// Closed-loop simulation under an arbitrary feedback u(t, m). The control is
/// held constant between discontinuities, which are located by bisection.
inline Trajectory integrate_state(const FoulingModel& model, const FeedbackFn& feedback,
                                  double m0, double t0, double t1, const SimOptions& opts = {}) {
  if (!(m0 > 0.0)) throw DomainError("initial mass must be positive");
  if (t1 < t0) throw DomainError("t_span must satisfy t0 <= t1");
  Trajectory tr;
  double t = t0, m = m0, J = 0.0;
  double u = feedback(t, m);
  while (true) {
    const double held = u;
    std::vector<detail::EventFn> ev{
        [&feedback, held](double tt, double mm) { return feedback(tt, mm) == held ? 1.0 : -1.0; }};
    const auto end = detail::run_segment(model, held, t, m, J, t1, ev, opts, tr.nodes);
    t = end.t;
    m = end.m;
    J = end.J;
    if (end.event < 0 || t >= t1) break;
    u = feedback(t, m);
    tr.events.push_back({t, detail::change_kind(held, u), m});
  }
  detail::finish(tr);
  return tr;
}

/// Hybrid simulation of the optimal feedback law from (t0, m0) up to the
/// horizon. Reaching m̄ before T̄ pins the state to the arc (u = ū) until T̄.
inline Trajectory integrate_feedback(const FeedbackLaw& law, double m0, double t0 = 0.0,
                                     const SimOptions& opts = {},
                                     std::optional<Regime> forced_start = std::nullopt) {
  const FoulingModel& model = law.model();
  const SingularArc& arc = law.arc();
  const double T = law.horizon();
  if (!(m0 > 0.0)) throw DomainError("initial mass must be positive");
  if (t0 < 0.0 || t0 > T) throw DomainError("t0 outside [0, T]");

  Trajectory tr;
  double t = t0, m = m0, J = 0.0;
  Regime regime = forced_start.value_or(law.regime(t, m));
  if (regime == Regime::singular) m = arc.m_bar;

  while (t < T) {
    if (regime == Regime::singular) {
      const double t_exit = std::min(*arc.T_bar, T);
      const double rate = arc.u_bar * model.g(arc.m_bar);
      const int pieces = std::max(1, static_cast<int>(std::ceil((t_exit - t) / opts.max_step)));
      for (int p = 0; p < pieces; ++p) {
        const double tp = t + (t_exit - t) * p / pieces;
        tr.nodes.push_back({tp, arc.m_bar, arc.u_bar, J + rate * (tp - t)});
      }
      J += rate * (t_exit - t);
      t = t_exit;
      tr.nodes.push_back({t, arc.m_bar, arc.u_bar, J});
      m = arc.m_bar;
      if (t >= T) break;
      tr.events.push_back({t, EventKind::leave_singular, m});
      regime = Regime::filtration;
      continue;
    }

    if (regime == Regime::backwash) {
      std::vector<detail::EventFn> ev{
          [&arc](double, double mm) { return mm - arc.m_bar; },
          [&model, &arc](double tt, double mm) {
            if (!(mm > arc.m_bar)) return 1.0;  // handled by the arc event
            return switching_time(model, arc, mm).T_tilde - tt;
          }};
      const auto end = detail::run_segment(model, -1.0, t, m, J, T, ev, opts, tr.nodes);
      t = end.t;
      m = end.m;
      J = end.J;
      if (end.event == 0) {
        m = arc.m_bar;
        tr.nodes.back().m = m;
        if (arc.T_bar && t < *arc.T_bar) {
          tr.events.push_back({t, EventKind::hit_singular, m});
          regime = Regime::singular;
        } else {
          tr.events.push_back({t, EventKind::switch_up, m});
          regime = Regime::filtration;
        }
      } else if (end.event == 1) {
        tr.events.push_back({t, EventKind::hit_curve, m});
        tr.events.push_back({t, EventKind::switch_up, m});
        regime = Regime::filtration;
      }
      continue;
    }

    // filtration: u = +1 until T, unless the arc is reached from below before T̄
    std::vector<detail::EventFn> ev;
    if (law.nontrivial() && arc.T_bar && t < *arc.T_bar && m < arc.m_bar) {
      const double T_bar = *arc.T_bar;
      ev.push_back([&arc, T_bar](double tt, double mm) {
        return tt < T_bar ? arc.m_bar - mm : 1.0;
      });
    }
    const auto end = detail::run_segment(model, 1.0, t, m, J, T, ev, opts, tr.nodes);
    t = end.t;
    m = end.m;
    J = end.J;
    if (end.event == 0) {
      m = arc.m_bar;
      tr.nodes.back().m = m;
      tr.events.push_back({t, EventKind::hit_singular, m});
      regime = Regime::singular;
      continue;
    }
    break;
  }
  if (tr.nodes.empty()) tr.nodes.push_back({t, m, law(t, m), J});
  detail::finish(tr);
  return tr;
}

namespace detail {

/// Cubic Hermite interpolant of m on one node interval, slopes from the
/// vector field under the interval's control.
struct HermiteSegment {
  double ta, tb, ma, mb, da, db;
  double operator()(double t) const {
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * ma + (s3 - 2 * s2 + s) * h * da + (-2 * s3 + 3 * s2) * mb +
           (s3 - s2) * h * db;
  }
};

}  // namespace detail

/// Backward integration of λ̇ = −λ f−' − u(λ f+' + g') from λ(T) = 0 along the
/// stored run; fills λ, φ = λ f+ + g and H = λ f− + u φ at every node.
inline Trajectory integrate_adjoint(const FoulingModel& model, Trajectory tr, double horizon,
                                    double lambda_T = 0.0, const SimOptions& opts = {}) {
  namespace odeint = boost::numeric::odeint;
  if (tr.nodes.empty() || std::abs(tr.t_end() - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw DomainError("integrate_adjoint: trajectory does not reach the horizon");
  }
  using L = std::array<double, 1>;
  auto fill = [&model](Node& n, double lambda) {
    n.lambda = lambda;
    n.phi = lambda * f_plus(model, n.m) + model.g(n.m);
    n.H = lambda * f_minus(model, n.m) + n.u * *n.phi;
  };

  double lambda = lambda_T;
  auto& nodes = tr.nodes;
  fill(nodes.back(), lambda);
  for (std::size_t i = nodes.size() - 1; i-- > 0;) {
    const Node& a = nodes[i];
    const Node& b = nodes[i + 1];
    const double u = a.u;
    if (b.t > a.t) {
      const detail::HermiteSegment m_of_t{a.t, b.t, a.m, b.m, mass_rate(model, a.m, u),
                                          mass_rate(model, b.m, u)};
      auto rhs = [&](const L& x, L& dxdt, double t) {
        const double m = m_of_t(t);
        dxdt[0] = -x[0] * df_minus(model, m) - u * (x[0] * df_plus(model, m) + model.dg(m));
      };
      L x{lambda};
      odeint::integrate_adaptive(
          odeint::make_controlled(opts.abs_tol * 1e-1, opts.rel_tol * 1e-1,
                                  odeint::runge_kutta_dopri5<L>()),
          rhs, x, b.t, a.t, -(b.t - a.t));
      lambda = x[0];
    }
    fill(nodes[i], lambda);
  }
  return tr;
}

struct AuditReport {
  double sign_violation = 0.0;         // max |u − sign φ| where |φ| > phi_threshold
  double hamiltonian_drift = 0.0;      // max |H(t) − H(T)|
  double max_lambda_before_T = -std::numeric_limits<double>::infinity();
  double singular_phi = 0.0;           // max |φ| on nodes with interior control
  double H_terminal = 0.0;
  std::size_t sign_checked = 0;
  std::size_t singular_nodes = 0;
  double phi_threshold = 1e-6;

  bool ok(double tol_H = 1e-6, double tol_phi_sing = 1e-7) const {
    return sign_violation == 0.0 && hamiltonian_drift <= tol_H && max_lambda_before_T < 0.0 &&
           singular_phi <= tol_phi_sing;
  }
};

/// Checks the necessary conditions along a trajectory whose adjoint has been
/// filled.
inline AuditReport pmp_audit(const Trajectory& tr, double phi_threshold = 1e-6) {
  if (!tr.has_adjoint()) throw DomainError("pmp_audit: adjoint not filled");
  AuditReport r;
  r.phi_threshold = phi_threshold;
  const double T = tr.t_end();
  r.H_terminal = *tr.nodes.back().H;
  for (const auto& n : tr.nodes) {
    r.hamiltonian_drift = std::max(r.hamiltonian_drift, std::abs(*n.H - r.H_terminal));
    if (n.t < T) r.max_lambda_before_T = std::max(r.max_lambda_before_T, *n.lambda);
    const bool bang = n.u == 1.0 || n.u == -1.0;
    if (!bang) {
      ++r.singular_nodes;
      r.singular_phi = std::max(r.singular_phi, std::abs(*n.phi));
    }
    if (std::abs(*n.phi) > phi_threshold) {
      ++r.sign_checked;
      const double s = *n.phi > 0.0 ? 1.0 : -1.0;
      r.sign_violation = std::max(r.sign_violation, std::abs(n.u - s));
    }
  }
  return r;
}

}  // namespace mfopt
