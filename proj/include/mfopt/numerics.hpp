#pragma once

// Small numerical toolkit shared by the synthesis, simulation and oracle
// layers: bracketed root finding, adaptive quadrature, golden-section search.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mfopt {

/// Default tolerances used throughout the library.
struct Tolerances {
  static constexpr double root = 1e-10;
  static constexpr double quad = 1e-10;
  static constexpr double band_sing = 1e-9;
  static constexpr double event_time = 1e-12;
  static constexpr double ode_rel = 1e-10;
  static constexpr double ode_abs = 1e-12;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bisection on a sign-changing bracket [lo, hi]. Iterates to machine
/// precision unless `width` is reached first; returns the midpoint of the
/// final bracket.
template <class F>
double bisect_root(F&& f, double lo, double hi, double width = 0.0) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw NumericError("bisect_root: interval does not bracket a root");
  }
  auto done = [width](double a, double b) {
    return std::abs(b - a) <= width ||
           std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t max_iter = 400;
  auto bracket = boost::math::tools::bisect(f, lo, hi, done, max_iter);
  return 0.5 * (bracket.first + bracket.second);
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of f over [a, b]; b < a gives the
/// signed integral.
template <class F>
double integrate(F&& f, double a, double b, double tol = Tolerances::quad) {
  if (a == b) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw NumericError("integrate: non-finite integration bound");
  }
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 25, tol * 1e-2, &err);
  return value;
}

/// Golden-section maximisation of a unimodal function on [lo, hi].
/// Returns (argmax, max).
template <class F>
std::pair<double, double> golden_maximize(F&& f, double lo, double hi,
                                          double x_tol = 1e-9) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best_x = 0.5 * (a + b);
  double best_f = f(best_x);
  // the maximum may sit on the boundary
  for (double edge : {lo, hi}) {
    const double fe = f(edge);
    if (fe > best_f) {
      best_f = fe;
      best_x = edge;
    }
  }
  return {best_x, best_f};
}

/// Central difference with relative step h·max(1, |x|); falls back to a
/// second-order forward difference when the stencil would leave [lower, ∞).
template <class F>
double central_difference(F&& f, double x, double h_rel = 1e-6,
                          double lower = -std::numeric_limits<double>::infinity()) {
  const double h = h_rel * std::max(1.0, std::abs(x));
  if (x - h < lower) {
    return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  }
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace mfopt
