#pragma once

// Geometric objects of the optimal synthesis: the singular arc, the switching
// curve T̃(m̃) with its switch/dispersal partition, and the resulting
// time-varying feedback law.

#include "mfopt/model.hpp"
#include "mfopt/numerics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfopt {

class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SingularArc {
  double horizon = 0.0;
  double m_bar = 0.0;
  double u_bar = 0.0;
  double lambda_bar = 0.0;
  double f_minus_at_m_bar = 0.0;
  std::optional<double> m_bar_T;  // only when f−(m̄) < 0
  std::optional<double> T_bar;    // may be <= 0: arc never used

  /// The arc can be part of an optimal trajectory only when f−(m̄) < 0.
  bool active() const { return f_minus_at_m_bar < 0.0; }
  /// Active and reachable within the horizon.
  bool used() const { return active() && T_bar && *T_bar > 0.0; }

  std::string branch() const {
    if (!active()) return "inactive";
    return used() ? "singular" : "singular-never-used";
  }
};

struct ArcSearchOptions {
  double m_max = 50.0;
  std::size_t n_samples = 5000;
};

/// Locates the unique positive root m̄ of ψ and the exit data of the
/// singular arc for horizon T.
inline SingularArc find_singular_arc(const FoulingModel& model, double horizon,
                                     ArcSearchOptions opts = {}) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  // Widen the window until ψ is positive at its right end.
  double m_max = opts.m_max;
  while (!(psi(model, m_max) > 0.0) && m_max < 1e8) m_max *= 2.0;

  const auto n = std::max<std::size_t>(opts.n_samples, 2);
  int last_sign = 0;
  double last_m = 0.0;
  int first_sign = 0;
  int changes = 0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = m_max * static_cast<double>(i) / static_cast<double>(n - 1);
    const double p = psi(model, m);
    const int s = (p > 0.0) - (p < 0.0);
    if (s == 0) continue;
    if (first_sign == 0) first_sign = s;
    if (last_sign != 0 && s != last_sign) {
      ++changes;
      lo = last_m;
      hi = m;
    }
    last_sign = s;
    last_m = m;
  }
  if (changes == 0) throw HypothesisError("H2 violated: psi has no sign change on the grid");
  if (changes > 1) throw HypothesisError("H2 violated: multiple roots of psi on the grid");
  if (first_sign > 0) throw HypothesisError("H2 violated: psi crosses from + to -");

  SingularArc arc;
  arc.horizon = horizon;
  arc.m_bar = bisect_root([&](double m) { return psi(model, m); }, lo, hi);
  const double fm = f_minus(model, arc.m_bar);
  const double fp = f_plus(model, arc.m_bar);
  arc.f_minus_at_m_bar = fm;
  arc.u_bar = -fm / fp;
  arc.lambda_bar = -model.g(arc.m_bar) / fp;
  if (arc.active()) {
    const double mT = g_inverse(model, gamma(model, arc.m_bar));
    arc.m_bar_T = mT;
    arc.T_bar = horizon - integrate([&](double m) { return 1.0 / model.f1(m); }, arc.m_bar, mT);
  }
  return arc;
}

/// Switching time T̃(m̃) and the terminal mass m_T(m̃) of the +1 trajectory
/// leaving (T̃, m̃). When γ(m̃) <= 0 there is no switch at that level and
/// T̃ = −∞, m_T = +∞.
struct SwitchPoint {
  double T_tilde;
  double m_T;
};

inline SwitchPoint switching_time(const FoulingModel& model, const SingularArc& arc,
                                  double m_tilde) {
  if (!arc.active()) {
    throw UnsupportedError("switching curve is undefined when f-(m_bar) >= 0");
  }
  if (m_tilde < arc.m_bar) {
    std::ostringstream os;
    os << "switching_time: m_tilde=" << m_tilde << " below m_bar=" << arc.m_bar;
    throw DomainError(os.str());
  }
  if (m_tilde == arc.m_bar && arc.T_bar) return {*arc.T_bar, *arc.m_bar_T};
  const double y = gamma(model, m_tilde);
  if (!(y > 0.0)) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  const double mT = g_inverse(model, y);
  const double elapsed = integrate([&](double m) { return 1.0 / model.f1(m); }, m_tilde, mT);
  return {arc.horizon - elapsed, mT};
}

/// Closed-form derivative T̃'(m̃) = 1/f1(m̃) − γ'(m̃)/(g'(m_T) f1(m_T)).
inline double switching_time_slope(const FoulingModel& model, double m_tilde, double m_T) {
  return 1.0 / model.f1(m_tilde) -
         gamma_prime(model, m_tilde) / (model.dg(m_T) * model.f1(m_T));
}

enum class CurveKind { switching, dispersal };

inline const char* to_string(CurveKind k) {
  return k == CurveKind::switching ? "switch" : "dispersal";
}

struct CurveSample {
  double m_tilde;
  double T_tilde;
  double m_T;
  double dT_tilde;
  CurveKind kind;

  /// Part of C proper (T̃ > 0); other samples are kept for the record.
  bool on_curve() const { return T_tilde > 0.0; }
};

struct SwitchingCurve {
  std::vector<CurveSample> samples;
  bool nonempty = false;

  std::vector<CurveSample> of_kind(CurveKind kind) const {
    std::vector<CurveSample> out;
    for (const auto& s : samples)
      if (s.on_curve() && s.kind == kind) out.push_back(s);
    return out;
  }
};

/// Samples C on the given mass grid (which must start at m̄).
inline SwitchingCurve sample_switching_curve(const FoulingModel& model, const SingularArc& arc,
                                             const std::vector<double>& m_grid) {
  if (!arc.active()) {
    throw UnsupportedError("switching curve is undefined when f-(m_bar) >= 0");
  }
  SwitchingCurve curve;
  curve.samples.reserve(m_grid.size());
  for (double m : m_grid) {
    const auto sp = switching_time(model, arc, m);
    CurveSample s{m, sp.T_tilde, sp.m_T, std::numeric_limits<double>::quiet_NaN(),
                  CurveKind::switching};
    if (std::isfinite(sp.m_T)) {
      s.dT_tilde = switching_time_slope(model, m, sp.m_T);
      s.kind = 1.0 + s.dT_tilde * model.f2(m) > 0.0 ? CurveKind::switching
                                                    : CurveKind::dispersal;
    }
    curve.nonempty = curve.nonempty || s.on_curve();
    curve.samples.push_back(s);
  }
  return curve;
}

/// n uniformly spaced masses on [m̄, m_hi].
inline std::vector<double> curve_grid(const SingularArc& arc, double m_hi, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = arc.m_bar + (m_hi - arc.m_bar) * static_cast<double>(i) /
                              static_cast<double>(std::max<std::size_t>(n - 1, 1));
  }
  return grid;
}

/// δ(m) = ∫_{m̄_T}^{m} (g + ᾱ)/f1, the payoff lost by leaving the arc early so
/// that the terminal mass is m instead of m̄_T.
inline double cost_difference_delta(const FoulingModel& model, const SingularArc& arc,
                                    double m_terminal) {
  if (!arc.active() || !arc.m_bar_T) {
    throw UnsupportedError("cost difference requires an active singular arc");
  }
  if (m_terminal < *arc.m_bar_T) throw DomainError("m_terminal below m_bar_T");
  const double alpha = model.g(arc.m_bar) * arc.f_minus_at_m_bar / f_plus(model, arc.m_bar);
  return integrate([&](double m) { return (model.g(m) + alpha) / model.f1(m); }, *arc.m_bar_T,
                   m_terminal);
}

/// δ'(m) = (g(m) + ᾱ)/f1(m).
inline double cost_difference_slope(const FoulingModel& model, const SingularArc& arc, double m) {
  const double alpha = model.g(arc.m_bar) * arc.f_minus_at_m_bar / f_plus(model, arc.m_bar);
  return (model.g(m) + alpha) / model.f1(m);
}

enum class Regime { backwash, singular, filtration };

/// Optimal feedback u[t, m]: −1 inside W = {m > m̄, t < T̃(m)}, ū on the arc
/// before T̄, +1 elsewhere. T̃ is evaluated on demand.
class FeedbackLaw {
 public:
  FeedbackLaw(const FoulingModel& model, SingularArc arc, bool curve_nonempty,
              double band = Tolerances::band_sing)
      : model_(&model), arc_(std::move(arc)), curve_nonempty_(curve_nonempty), band_(band) {}

  FeedbackLaw(const FoulingModel& model, SingularArc arc, const SwitchingCurve& curve,
              double band = Tolerances::band_sing)
      : FeedbackLaw(model, std::move(arc), curve.nonempty, band) {}

  const SingularArc& arc() const { return arc_; }
  const FoulingModel& model() const { return *model_; }
  double horizon() const { return arc_.horizon; }
  double band() const { return band_; }
  /// False when the law degenerates to u ≡ +1.
  bool nontrivial() const { return arc_.active() && curve_nonempty_; }

  /// W membership, strict in both coordinates.
  bool in_backwash_region(double t, double m) const {
    if (!nontrivial() || !(m > arc_.m_bar)) return false;
    return t < switching_time(*model_, arc_, m).T_tilde;
  }

  bool on_arc(double t, double m) const {
    return nontrivial() && arc_.T_bar && t < *arc_.T_bar && std::abs(m - arc_.m_bar) <= band_;
  }

  Regime regime(double t, double m) const {
    if (t < 0.0 || t > horizon()) {
      std::ostringstream os;
      os << "feedback: t=" << t << " outside [0, " << horizon() << "]";
      throw DomainError(os.str());
    }
    if (on_arc(t, m)) return Regime::singular;
    if (in_backwash_region(t, m)) return Regime::backwash;
    return Regime::filtration;
  }

  double operator()(double t, double m) const { return control(regime(t, m)); }

  double control(Regime r) const {
    switch (r) {
      case Regime::backwash: return -1.0;
      case Regime::singular: return arc_.u_bar;
      case Regime::filtration: break;
    }
    return 1.0;
  }

 private:
  const FoulingModel* model_;
  SingularArc arc_;
  bool curve_nonempty_;
  double band_;
};

/// Full synthesis for one model and horizon.
struct Synthesis {
  SingularArc arc;
  SwitchingCurve curve;  // empty when the arc is inactive
};

/// Default sampling window for C: up to 2.2·m̄_T.
inline double default_view_mass(const SingularArc& arc) {
  if (arc.m_bar_T) return 2.2 * *arc.m_bar_T;
  return 2.2 * arc.m_bar;
}

inline Synthesis synthesize(const FoulingModel& model, double horizon, std::size_t n_curve = 401,
                            std::optional<double> m_curve_max = std::nullopt,
                            ArcSearchOptions opts = {}) {
  Synthesis s;
  s.arc = find_singular_arc(model, horizon, opts);
  if (s.arc.active()) {
    const double hi = m_curve_max.value_or(default_view_mass(s.arc));
    s.curve = sample_switching_curve(model, s.arc, curve_grid(s.arc, hi, n_curve));
  }
  return s;
}

inline FeedbackLaw make_feedback(const FoulingModel& model, const Synthesis& s) {
  return FeedbackLaw(model, s.arc, s.curve);
}

}  // namespace mfopt
