#pragma once

// Test-only reference computations. These deliberately avoid the library's
// closed forms: densities are integrated numerically from the raw kernels
// and derivatives come from finite differences.

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

/// Integral over the whole real line of an even kernel, 2 * int_0^inf.
inline double integrate_even(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

inline double integrate_to_inf(const std::function<double(double)>& f, double a) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, a, std::numeric_limits<double>::infinity(), 1e-12);
}

/// Richardson-extrapolated central difference (error O(h^4)).
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-3) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

inline Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                double h = 1e-4) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    auto fj = [&](double v) {
      Eigen::VectorXd y = x;
      y[j] = v;
      return f(y);
    };
    g[j] = derivative(fj, x[j], h);
  }
  return g;
}

/// Second derivatives by double central differences of f.
inline Eigen::MatrixXd hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                               double h = 1e-4) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd H(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      auto at = [&](double di, double dj) {
        Eigen::VectorXd y = x;
        y[i] += di;
        y[j] += dj;
        return f(y);
      };
      H(i, j) = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace oracle
