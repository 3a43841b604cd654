#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace lsqtobit {

/// Objective returning f(x) and writing its gradient. May return +inf (or
/// NaN) for infeasible points; the line search backs off from those.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
  int max_iter = 500;
  /// Converged when max |grad| <= grad_tol.
  double grad_tol = 1e-6;
  // Strong Wolfe constants.
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 50;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and a
/// line search satisfying the strong Wolfe conditions.
BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& options);

}  // namespace lsqtobit
