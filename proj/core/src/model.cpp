#include "lsqtobit/model.hpp"

#include "lsqtobit/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lsqtobit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// exp(709) is the largest finite exponential.
constexpr double kMaxLogPhi = 700.0;

void data_error(const std::string& msg) { throw Error(ErrorCategory::Data, msg); }

}  // namespace

Eigen::Index Dataset::censored_count() const noexcept {
  Eigen::Index m = 0;
  for (auto c : censored) m += c ? 1 : 0;
  return m;
}

void Dataset::validate() const {
  const Eigen::Index n = t.size();
  if (n < 1) data_error("dataset is empty");
  if (static_cast<Eigen::Index>(censored.size()) != n || X.rows() != n || W.rows() != n) {
    std::ostringstream os;
    os << "inconsistent dataset shapes: t=" << n << " censored=" << censored.size() << " X=" << X.rows()
       << " W=" << W.rows();
    data_error(os.str());
  }
  if (X.cols() < 1 || W.cols() < 1) data_error("design matrices need at least an intercept column");
  if (!(psi > 0.0) || !std::isfinite(psi)) data_error("censoring threshold psi must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (X(i, 0) != 1.0 || W(i, 0) != 1.0) {
      std::ostringstream os;
      os << "row " << i + 1 << ": leading design column must be the intercept (1)";
      data_error(os.str());
    }
    if (!X.row(i).allFinite() || !W.row(i).allFinite()) {
      std::ostringstream os;
      os << "row " << i + 1 << ": non-finite covariate";
      data_error(os.str());
    }
    if (censored[i]) {
      if (t[i] != psi) {
        std::ostringstream os;
        os << "row " << i + 1 << ": censored response must equal psi=" << psi << ", got " << t[i];
        data_error(os.str());
      }
    } else if (!(t[i] > psi) || !std::isfinite(t[i])) {
      std::ostringstream os;
      os << "row " << i + 1 << ": uncensored response must exceed psi=" << psi << ", got " << t[i];
      data_error(os.str());
    }
  }
}

Eigen::VectorXd ParamVector::flat() const {
  Eigen::VectorXd out(size());
  out << beta, kappa;
  return out;
}

ParamVector ParamVector::from_flat(const Eigen::VectorXd& theta, Eigen::Index n_beta) {
  if (n_beta < 0 || n_beta > theta.size()) throw DomainError("n_beta exceeds parameter length");
  return {theta.head(n_beta), theta.tail(theta.size() - n_beta)};
}

TobitLikelihood::TobitLikelihood(const ModelSpec& spec, const Dataset& data)
    : spec_(spec),
      log_t_(data.t.array().log()),
      censored_(data.censored),
      X_(data.X),
      W_(data.W),
      log_psi_(std::log(data.psi)),
      z_q_(0.0) {
  data.validate();
  if (!(spec.q > 0.0 && spec.q < 1.0)) throw DomainError("q must lie in (0,1)");
  if (std::fabs(spec.psi - data.psi) > 1e-12 * std::fabs(data.psi)) {
    std::ostringstream os;
    os << "model psi=" << spec.psi << " does not match dataset psi=" << data.psi;
    throw Error(ErrorCategory::Data, os.str());
  }
  z_q_ = spec.family.quantile(spec.q);
}

Linearization TobitLikelihood::linearize(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim()) throw DomainError("parameter vector does not match the design matrices");
  Linearization lin;
  lin.log_Q = X_ * theta.head(n_beta());
  lin.log_phi = W_ * theta.tail(n_kappa());
  const Eigen::Index n = n_obs();
  lin.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = censored_[i] ? log_psi_ : log_t_[i];
    lin.z[i] = (y - lin.log_Q[i]) * std::exp(-0.5 * lin.log_phi[i]) + z_q_;
  }
  return lin;
}

double TobitLikelihood::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
  if (theta.size() != dim()) throw DomainError("parameter vector does not match the design matrices");
  if (!theta.allFinite()) return kNegInf;
  const GeneratorFamily& family = spec_.family;
  const Eigen::VectorXd log_Q = X_ * theta.head(n_beta());
  const Eigen::VectorXd log_phi = W_ * theta.tail(n_kappa());
  const Eigen::Index n = n_obs();

  Eigen::VectorXd d_mu, d_nu;
  if (grad) {
    d_mu.resize(n);
    d_nu.resize(n);
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nu = log_phi[i];
    if (!(std::fabs(nu) < kMaxLogPhi)) return kNegInf;
    const double inv_sqrt_phi = std::exp(-0.5 * nu);
    if (censored_[i]) {
      const double z = (log_psi_ - log_Q[i]) * inv_sqrt_phi + z_q_;
      const double log_G = family.log_cdf(z);
      if (!std::isfinite(log_G)) return kNegInf;
      total += log_G;
      if (grad) {
        const double pi = family.pi_ratio(z);
        d_mu[i] = -pi * inv_sqrt_phi;
        d_nu[i] = -0.5 * pi * (z - z_q_);
      }
    } else {
      const double z = (log_t_[i] - log_Q[i]) * inv_sqrt_phi + z_q_;
      const double log_g = family.log_generator(z * z);
      if (!std::isfinite(log_g)) return kNegInf;
      total += -0.5 * nu + log_g - log_t_[i];
      if (grad) {
        const double slope = family.log_density_slope(z);
        d_mu[i] = -slope * inv_sqrt_phi;
        d_nu[i] = -0.5 - 0.5 * slope * (z - z_q_);
      }
    }
  }
  if (std::isnan(total)) return kNegInf;
  if (grad) {
    grad->resize(dim());
    grad->head(n_beta()) = X_.transpose() * d_mu;
    grad->tail(n_kappa()) = W_.transpose() * d_nu;
  }
  return total;
}

double TobitLikelihood::value(const Eigen::VectorXd& theta) const { return evaluate(theta, nullptr); }

Eigen::VectorXd TobitLikelihood::gradient(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g;
  const double v = evaluate(theta, &g);
  if (!std::isfinite(v)) g = Eigen::VectorXd::Constant(dim(), std::numeric_limits<double>::quiet_NaN());
  return g;
}

double TobitLikelihood::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  return evaluate(theta, &grad);
}

Eigen::MatrixXd TobitLikelihood::hessian(const Eigen::VectorXd& theta) const {
  const Eigen::Index p = dim();
  Eigen::MatrixXd H(p, p);
  // cube root of machine epsilon balances truncation and rounding error
  const double rel_step = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd shifted = theta;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = rel_step * std::max(1.0, std::fabs(theta[j]));
    shifted[j] = theta[j] + h;
    const Eigen::VectorXd g_plus = gradient(shifted);
    shifted[j] = theta[j] - h;
    const Eigen::VectorXd g_minus = gradient(shifted);
    shifted[j] = theta[j];
    H.col(j) = (g_plus - g_minus) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

double loglik(const ModelSpec& spec, const Dataset& data, const ParamVector& theta) {
  return TobitLikelihood(spec, data).value(theta.flat());
}

Eigen::VectorXd score(const ModelSpec& spec, const Dataset& data, const ParamVector& theta) {
  return TobitLikelihood(spec, data).gradient(theta.flat());
}

Eigen::MatrixXd hessian(const ModelSpec& spec, const Dataset& data, const ParamVector& theta) {
  return TobitLikelihood(spec, data).hessian(theta.flat());
}

}  // namespace lsqtobit
