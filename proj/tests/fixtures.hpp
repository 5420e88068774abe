#pragma once

#include "mfopt/model.hpp"

#include <cmath>

namespace mfopt::testing {

inline FoulingModel benyahia() { return build_model("benyahia", {{"a", 1}, {"b", 1}, {"e", 1}}); }
inline FoulingModel cogan() { return build_model("cogan", {{"a", 1}, {"b", 1}, {"e", 1}}); }

/// Composite Simpson rule, kept independent of the library quadrature.
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// A model that satisfies the ψ sign pattern but has f−(m̄) > 0 (it breaks
/// the monotonicity clauses: f1 constant, g increasing).
inline FoulingModel inactive_arc_model() {
  FoulingModel::Callables fns;
  fns.f1 = [](double) { return 1.0; };
  fns.f2 = [](double m) { return 0.5 * m / (1.0 + m); };
  fns.g = [](double m) { return 2.0 + m; };
  return make_custom_model("inactive", std::move(fns));
}

}  // namespace mfopt::testing
