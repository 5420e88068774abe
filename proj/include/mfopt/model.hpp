#pragma once

// Fouling models: the attachment rate f1, the detachment rate f2 and the
// membrane flux g, together with the combinations the optimal synthesis is
// built from.

#include "mfopt/numerics.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfopt {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using ScalarFn = std::function<double(double)>;

enum class ModelKind { benyahia, cogan, custom };

/// Immutable description of a fouling model. Built-ins carry exact
/// derivatives; custom models fall back to central differences for any
/// derivative they do not supply.
class FoulingModel {
 public:
  struct Callables {
    ScalarFn f1, f2, g;
    ScalarFn df1, df2, dg;  // optional
  };

  FoulingModel(std::string name, ModelKind kind, std::map<std::string, double> params,
               Callables fns)
      : name_(std::move(name)), kind_(kind), params_(std::move(params)), fns_(std::move(fns)) {
    if (!fns_.f1 || !fns_.f2 || !fns_.g) {
      throw ParameterError("model '" + name_ + "' must provide f1, f2 and g");
    }
    for (const auto& [key, value] : params_) {
      if (!(value > 0.0)) {
        throw ParameterError("parameter " + key + " must be positive");
      }
    }
  }

  const std::string& name() const { return name_; }
  ModelKind kind() const { return kind_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& key) const { return params_.at(key); }
  bool is_builtin() const { return kind_ != ModelKind::custom; }

  double f1(double m) const { return fns_.f1(m); }
  double f2(double m) const { return fns_.f2(m); }
  double g(double m) const { return fns_.g(m); }

  double df1(double m) const { return fns_.df1 ? fns_.df1(m) : fd(fns_.f1, m); }
  double df2(double m) const { return fns_.df2 ? fns_.df2(m) : fd(fns_.f2, m); }
  double dg(double m) const { return fns_.dg ? fns_.dg(m) : fd(fns_.g, m); }

  bool has_exact_derivatives() const { return fns_.df1 && fns_.df2 && fns_.dg; }

 private:
  static double fd(const ScalarFn& f, double m) { return central_difference(f, m, 1e-6, 0.0); }

  std::string name_;
  ModelKind kind_;
  std::map<std::string, double> params_;
  Callables fns_;
};

// ---------------------------------------------------------------------------
// Derived functions

inline double f_minus(const FoulingModel& model, double m) {
  return 0.5 * (model.f1(m) - model.f2(m));
}
inline double f_plus(const FoulingModel& model, double m) {
  return 0.5 * (model.f1(m) + model.f2(m));
}
inline double df_minus(const FoulingModel& model, double m) {
  return 0.5 * (model.df1(m) - model.df2(m));
}
inline double df_plus(const FoulingModel& model, double m) {
  return 0.5 * (model.df1(m) + model.df2(m));
}

/// ψ = g (f−' f+ − f− f+') + g' f+ f−. Its sign decides the direction in which
/// the switching function can cross zero.
inline double psi(const FoulingModel& model, double m) {
  const double fm = f_minus(model, m);
  const double fp = f_plus(model, m);
  return model.g(m) * (df_minus(model, m) * fp - fm * df_plus(model, m)) +
         model.dg(m) * fp * fm;
}

/// γ = −g f− / f+.
inline double gamma(const FoulingModel& model, double m) {
  return -model.g(m) * f_minus(model, m) / f_plus(model, m);
}

/// γ' = −ψ / f+².
inline double gamma_prime(const FoulingModel& model, double m) {
  const double fp = f_plus(model, m);
  return -psi(model, m) / (fp * fp);
}

/// Controlled vector field ṁ = f− + u f+.
inline double mass_rate(const FoulingModel& model, double m, double u) {
  return f_minus(model, m) + u * f_plus(model, m);
}

// ---------------------------------------------------------------------------
// Built-ins

namespace detail {
inline double require_param(const std::map<std::string, double>& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw ParameterError(std::string("missing parameter ") + key);
  }
  if (!(it->second > 0.0)) {
    throw ParameterError(std::string("parameter ") + key + " must be positive");
  }
  return it->second;
}
}  // namespace detail

/// Builds one of the published models ("benyahia" or "cogan") from its
/// positive parameters a, b, e.
inline FoulingModel build_model(const std::string& name,
                                const std::map<std::string, double>& params) {
  if (name != "benyahia" && name != "cogan") {
    throw ParameterError("unknown model '" + name + "' (expected benyahia or cogan)");
  }
  for (const auto& [key, value] : params) {
    if (key != "a" && key != "b" && key != "e") {
      throw ParameterError("unknown parameter '" + key + "' for model " + name);
    }
  }
  const double a = detail::require_param(params, "a");
  const double b = detail::require_param(params, "b");
  const double e = detail::require_param(params, "e");

  FoulingModel::Callables fns;
  fns.f1 = [b, e](double m) { return b / (e + m); };
  fns.df1 = [b, e](double m) { return -b / ((e + m) * (e + m)); };
  fns.g = [e](double m) { return 1.0 / (e + m); };
  fns.dg = [e](double m) { return -1.0 / ((e + m) * (e + m)); };
  ModelKind kind;
  if (name == "benyahia") {
    kind = ModelKind::benyahia;
    fns.f2 = [a](double m) { return a * m; };
    fns.df2 = [a](double) { return a; };
  } else {
    kind = ModelKind::cogan;
    fns.f2 = [a, e](double m) { return a * m / (e + m); };
    fns.df2 = [a, e](double m) { return a * e / ((e + m) * (e + m)); };
  }
  return FoulingModel(name, kind, {{"a", a}, {"b", b}, {"e", e}}, std::move(fns));
}

/// Wraps user callables. Derivatives left empty are replaced by central
/// differences with relative step 1e-6.
inline FoulingModel make_custom_model(std::string name, FoulingModel::Callables fns,
                                      std::map<std::string, double> params = {}) {
  return FoulingModel(std::move(name), ModelKind::custom, std::move(params), std::move(fns));
}

// ---------------------------------------------------------------------------
// Hypothesis checks

struct HypothesisReport {
  double m_max = 0.0;
  std::size_t n_samples = 0;

  bool f1_positive = false;        // f1 > 0
  bool g_positive = false;         // g > 0
  bool f2_zero_at_origin = false;  // f2(0) = 0
  bool f2_positive = false;        // f2 > 0 for m > 0
  bool f1_decreasing = false;      // f1' < 0
  bool g_decreasing = false;       // g' < 0
  bool g_vanishes = false;         // g(m_max) < 0.05 g(0)
  bool f2_increasing = false;      // f2' > 0

  std::vector<int> psi_signs;  // -1, 0, +1 per sample
  int psi_sign_changes = 0;
  bool psi_single_neg_to_pos = false;
  std::optional<std::pair<double, double>> psi_bracket;  // around the crossing

  bool h1() const {
    return f1_positive && g_positive && f2_zero_at_origin && f2_positive && f1_decreasing &&
           g_decreasing && g_vanishes && f2_increasing;
  }
  bool h2() const { return psi_single_neg_to_pos; }
  bool all_pass() const { return h1() && h2(); }

  /// Human-readable summary. The ψ check is a statement about the grid only.
  std::string describe() const {
    std::ostringstream os;
    auto flag = [](bool ok) { return ok ? "pass" : "FAIL"; };
    os << "H1.i   f1>0: " << flag(f1_positive) << ", g>0: " << flag(g_positive) << '\n'
       << "H1.ii  f2(0)=0: " << flag(f2_zero_at_origin) << ", f2>0: " << flag(f2_positive) << '\n'
       << "H1.iii f1'<0: " << flag(f1_decreasing) << ", g'<0: " << flag(g_decreasing)
       << ", g(m_max)<0.05g(0): " << flag(g_vanishes) << '\n'
       << "H1.iv  f2'>0: " << flag(f2_increasing) << '\n'
       << "H2     psi sign changes: " << psi_sign_changes << " ("
       << (psi_single_neg_to_pos ? "single - to + crossing" : "not a single - to + crossing")
       << ", verified on grid of " << n_samples << " samples over [0, " << m_max << "])\n";
    return os.str();
  }
};

inline HypothesisReport check_hypotheses(const FoulingModel& model, double m_max,
                                         std::size_t n_samples) {
  if (!(m_max > 0.0) || n_samples < 2) {
    throw DomainError("check_hypotheses requires m_max > 0 and n_samples >= 2");
  }
  HypothesisReport r;
  r.m_max = m_max;
  r.n_samples = n_samples;
  r.f1_positive = r.g_positive = r.f2_positive = true;
  r.f1_decreasing = r.g_decreasing = r.f2_increasing = true;
  r.f2_zero_at_origin = model.f2(0.0) == 0.0;
  r.g_vanishes = model.g(m_max) < 0.05 * model.g(0.0);

  int last_sign = 0;
  double last_m = 0.0;
  int first_sign = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double m = m_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    if (!(model.f1(m) > 0.0)) r.f1_positive = false;
    if (!(model.g(m) > 0.0)) r.g_positive = false;
    if (m > 0.0 && !(model.f2(m) > 0.0)) r.f2_positive = false;
    if (!(model.df1(m) < 0.0)) r.f1_decreasing = false;
    if (!(model.dg(m) < 0.0)) r.g_decreasing = false;
    if (!(model.df2(m) > 0.0)) r.f2_increasing = false;

    const double p = psi(model, m);
    const int s = (p > 0.0) - (p < 0.0);
    r.psi_signs.push_back(s);
    if (s == 0) continue;
    if (first_sign == 0) first_sign = s;
    if (last_sign != 0 && s != last_sign) {
      ++r.psi_sign_changes;
      r.psi_bracket = std::make_pair(last_m, m);
    }
    last_sign = s;
    last_m = m;
  }
  r.psi_single_neg_to_pos = r.psi_sign_changes == 1 && first_sign < 0;
  if (r.psi_sign_changes != 1) r.psi_bracket.reset();
  return r;
}

// ---------------------------------------------------------------------------
// Closed forms

/// ψ for the built-ins written as the expanded rational functions of (a,b,e,m).
inline double psi_closed_form(const FoulingModel& model, double m) {
  if (!model.is_builtin()) {
    throw UnsupportedError("closed-form psi is only available for built-in models");
  }
  const double a = model.param("a");
  const double b = model.param("b");
  const double e = model.param("e");
  const double den = 4.0 * std::pow(e + m, 4);
  if (model.kind() == ModelKind::benyahia) {
    const double num = a * a * e * e * m * m + 2.0 * a * a * e * m * m * m +
                       a * a * m * m * m * m - 2.0 * a * b * e * e - 6.0 * a * b * e * m -
                       4.0 * a * b * m * m - b * b;
    return num / den;
  }
  const double num = (a * m - b) * (a * m - b) - 2.0 * a * b * e - 2.0 * b * b;
  return num / den;
}

/// |ψ(m) − closed form(m)|.
inline double psi_closed_form_check(const FoulingModel& model, double m) {
  return std::abs(psi(model, m) - psi_closed_form(model, m));
}

/// Inverse of the decreasing flux g on (0, g(0)].
inline double g_inverse(const FoulingModel& model, double y) {
  const double g0 = model.g(0.0);
  if (!(y > 0.0) || y > g0) {
    std::ostringstream os;
    os << "g_inverse: flux " << y << " outside (0, " << g0 << "]";
    throw DomainError(os.str());
  }
  if (y == g0) return 0.0;
  if (model.is_builtin()) {
    return std::max(0.0, 1.0 / y - model.param("e"));
  }
  double hi = 1.0;
  while (!(model.g(hi) < y)) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("g_inverse: flux never drops below target");
  }
  return bisect_root([&](double m) { return model.g(m) - y; }, 0.0, hi);
}

}  // namespace mfopt
