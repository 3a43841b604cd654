#pragma once

#include "lsqtobit/errors.hpp"
#include "lsqtobit/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lsqtobit {

struct FitConfig {
  /// Profile grid for the extra parameter. Empty: fit at spec.family.xi.
  std::vector<double> xi_grid;
  int max_iter = 500;
  /// Tolerance on max |score| / n.
  double grad_tol = 1e-6;
  /// Extra attempts from a perturbed start (N(0, 0.1^2) per coordinate).
  int restarts = 3;
  std::uint64_t seed = 1;
  /// Standard errors need one extra Hessian at the estimate.
  bool compute_se = true;
  /// Newton refinement steps on the finite-difference Hessian after BFGS.
  int newton_steps = 8;
};

struct ProfilePoint {
  double xi = 0.0;
  double loglik = 0.0;  // NaN when the fit at xi failed
  bool converged = false;
};

struct FitResult {
  ParamVector theta_hat;
  GeneratorFamily family;  // evaluated at xi_hat
  double xi_hat = 0.0;
  double q = 0.5;
  double psi = 1.0;
  Eigen::VectorXd se;          // NaN entries when se_available is false
  Eigen::MatrixXd covariance;  // inverse of -H at theta_hat
  bool se_available = false;
  double loglik = 0.0;
  /// AIC/BIC count only beta and kappa; xi is profiled, not estimated.
  double aic = 0.0;
  double bic = 0.0;
  int n_params = 0;
  Eigen::Index n_obs = 0;
  Eigen::Index n_censored = 0;
  bool converged = false;
  int iterations = 0;
  double score_max_norm = 0.0;  // max |score| at theta_hat, unscaled
  std::vector<ProfilePoint> profile_trace;
  std::vector<std::string> warnings;
  std::vector<std::string> beta_names;
  std::vector<std::string> kappa_names;

  ModelSpec spec() const { return {family, q, psi}; }
};

/// Raised when no start reaches the gradient tolerance. Carries the best
/// iterate found.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, FitResult partial)
      : Error(ErrorCategory::NonConvergence, what), partial_(std::move(partial)) {}
  const FitResult& partial() const noexcept { return partial_; }

 private:
  FitResult partial_;
};

/// Maximum likelihood fit. With a non-empty xi_grid the extra parameter is
/// profiled: theta is maximized at every grid value and the grid value with
/// the largest maximized log-likelihood wins.
FitResult fit(const ModelSpec& spec, const Dataset& data, const FitConfig& config = {});

/// Least-squares start on the uncensored rows.
ParamVector initial_theta(const ModelSpec& spec, const Dataset& data);

/// Percentage change of the modelled quantile per unit increase of a
/// covariate with coefficient beta_j.
inline double percent_effect(double beta_j) { return std::expm1(beta_j) * 100.0; }

double information_aic(double loglik, int n_params);
double information_bic(double loglik, int n_params, Eigen::Index n_obs);

/// Throws Error(RankDeficient) naming the collinear columns.
void check_full_rank(const Eigen::MatrixXd& design, const std::vector<std::string>& names,
                     const std::string& label);

struct QTraceEntry {
  double q = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double xi_hat = 0.0;
  bool converged = false;
  std::string error;
};

struct QSelection {
  double q_otm = 0.0;
  FitResult best;
  std::vector<QTraceEntry> trace;
};

/// AIC differences below this are ties (broken by BIC, then smaller q).
inline constexpr double kAicTieTolerance = 1e-5;

/// Fits at every q of the grid and returns the AIC-optimal q.
QSelection select_q(const ModelSpec& spec_template, const Dataset& data, const FitConfig& config,
                    const std::vector<double>& q_grid);

}  // namespace lsqtobit
