#pragma once

#include "lsqtobit/generators.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lsqtobit {

/// Left-censored sample. Censored responses are stored as psi.
/// X and W carry a leading column of ones (intercepts of the quantile and
/// dispersion submodels).
struct Dataset {
  Eigen::VectorXd t;
  std::vector<std::uint8_t> censored;
  Eigen::MatrixXd X;
  Eigen::MatrixXd W;
  double psi = 1.0;
  /// Optional column labels, one per column of X / W (intercept included).
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;

  Eigen::Index size() const noexcept { return t.size(); }
  Eigen::Index censored_count() const noexcept;

  /// Throws Error(Data) when shapes or censoring flags are inconsistent.
  void validate() const;
};

/// theta = (beta, kappa) with Q_i = exp(x_i' beta), phi_i = exp(w_i' kappa).
struct ParamVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd kappa;

  Eigen::Index size() const noexcept { return beta.size() + kappa.size(); }
  Eigen::VectorXd flat() const;
  static ParamVector from_flat(const Eigen::VectorXd& theta, Eigen::Index n_beta);
};

struct ModelSpec {
  GeneratorFamily family;
  double q = 0.5;
  double psi = 1.0;
};

/// Log-likelihood, including the -log t_i Jacobian of uncensored cases so
/// the value is a true log density. Returns -inf when theta is infeasible
/// (dispersion overflow, vanishing censored probability).
double loglik(const ModelSpec& spec, const Dataset& data, const ParamVector& theta);

/// Analytic gradient of loglik with respect to (beta, kappa).
Eigen::VectorXd score(const ModelSpec& spec, const Dataset& data, const ParamVector& theta);

/// Observed Hessian: central differences of the analytic score,
/// symmetrized.
Eigen::MatrixXd hessian(const ModelSpec& spec, const Dataset& data, const ParamVector& theta);

/// Per-observation pieces of the likelihood evaluated at one theta.
struct Linearization {
  Eigen::VectorXd log_Q;
  Eigen::VectorXd log_phi;
  Eigen::VectorXd z;  // standardized argument of G (censored) or g (uncensored)
};

/// Likelihood evaluator with the data-dependent constants cached. Used by
/// the optimizer; the free functions above construct one per call.
class TobitLikelihood {
 public:
  TobitLikelihood(const ModelSpec& spec, const Dataset& data);

  Eigen::Index dim() const noexcept { return X_.cols() + W_.cols(); }
  Eigen::Index n_beta() const noexcept { return X_.cols(); }
  Eigen::Index n_kappa() const noexcept { return W_.cols(); }
  Eigen::Index n_obs() const noexcept { return log_t_.size(); }
  double z_q() const noexcept { return z_q_; }
  const ModelSpec& spec() const noexcept { return spec_; }

  double value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  /// Value and gradient in one pass; the gradient is left unspecified when
  /// the value is -inf.
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const;

  Linearization linearize(const Eigen::VectorXd& theta) const;

 private:
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;

  ModelSpec spec_;
  Eigen::VectorXd log_t_;
  std::vector<std::uint8_t> censored_;
  Eigen::MatrixXd X_;
  Eigen::MatrixXd W_;
  double log_psi_;
  double z_q_;
};

}  // namespace lsqtobit
