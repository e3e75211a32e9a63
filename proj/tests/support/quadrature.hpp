#pragma once

// Test-only adaptive Simpson quadrature of the Gamma(shape, rate) density,
// written against the closed-form pdf so kernel tests do not depend on the
// library's incomplete-gamma backend.

#include <cmath>

namespace testsupport {

inline double gamma_pdf(double shape, double rate, double x) {
  if (x <= 0) return 0;
  return std::exp(shape * std::log(rate) - std::lgamma(shape) + (shape - 1) * std::log(x) -
                  rate * x);
}

namespace detail {

template <class F>
double simpson(F f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

template <class F>
double adaptive(F f, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = simpson(f, a, m);
  const double right = simpson(f, m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(f, a, m, left, tol / 2, depth - 1) +
         adaptive(f, m, b, right, tol / 2, depth - 1);
}

}  // namespace detail

inline double integrate_gamma_pdf(double shape, double rate, double lo, double hi,
                                  double tol = 1e-12) {
  auto f = [=](double x) { return gamma_pdf(shape, rate, x); };
  return detail::adaptive(f, lo, hi, detail::simpson(f, lo, hi), tol, 40);
}

}  // namespace testsupport
