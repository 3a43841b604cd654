#pragma once

// Internal scalar special functions shared by the generator families.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace lsqtobit::detail {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// log Phi(x) without underflow; asymptotic Mills-ratio series below -37.
inline double log_norm_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// phi(x) / Phi(x); Laplace continued fraction in the left tail.
inline double norm_hazard(double x) {
  if (x > -8.0) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return pdf / norm_cdf(x);
  }
  if (std::isinf(x)) return std::numeric_limits<double>::infinity();
  const double a = -x;
  double cf = a;
  for (int k = 60; k >= 1; --k) cf = a + k / cf;
  return cf;
}

inline double norm_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// log of the regularized upper incomplete gamma Q(a, x), with an
/// asymptotic expansion once Q underflows.
inline double log_gamma_q(double a, double x) {
  const double q = boost::math::gamma_q(a, x);
  if (q > std::numeric_limits<double>::min()) return std::log(q);
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  const double series = 1.0 + (a - 1.0) / x + (a - 1.0) * (a - 2.0) / (x * x);
  return (a - 1.0) * std::log(x) - x - std::lgamma(a) + std::log(series);
}

/// Root of an increasing function by Newton steps safeguarded with a
/// bisection bracket. `start` need not bracket the root.
template <class F, class DF>
double solve_increasing(F f, DF df, double start, double xtol) {
  double lo = start, hi = start;
  double f_start = f(start);
  if (f_start == 0.0) return start;
  double step = std::max(1.0, std::fabs(start)) * 1e-3;
  if (f_start < 0.0) {
    for (int i = 0; i < 200; ++i) {
      hi = start + step;
      if (f(hi) >= 0.0) break;
      lo = hi;
      step *= 2.0;
    }
  } else {
    for (int i = 0; i < 200; ++i) {
      lo = start - step;
      if (f(lo) <= 0.0) break;
      hi = lo;
      step *= 2.0;
    }
  }
  double x = start;
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) lo = x; else hi = x;
    const double d = df(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= xtol * std::max(1.0, std::fabs(x)) || hi - lo <= xtol * std::max(1.0, std::fabs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace lsqtobit::detail
