#include "lsqtobit/estimator.hpp"

#include "lsqtobit/optimizer.hpp"
#include "lsqtobit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lsqtobit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinDispersion = 1e-6;

struct FixedFit {
  Eigen::VectorXd theta;
  double loglik = -std::numeric_limits<double>::infinity();
  double score_max_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

std::vector<std::string> default_names(const std::vector<std::string>& given, Eigen::Index cols,
                                       const char* prefix) {
  if (static_cast<Eigen::Index>(given.size()) == cols) return given;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < cols; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

// Newton iterations on the finite-difference Hessian, accepted only while
// they do not lower the likelihood.
void newton_refine(const TobitLikelihood& lik, Eigen::VectorXd& theta, double& value, int max_steps) {
  const double n = static_cast<double>(lik.n_obs());
  for (int step = 0; step < max_steps; ++step) {
    const Eigen::VectorXd g = lik.gradient(theta);
    if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() <= 1e-11 * n) return;
    const Eigen::MatrixXd info = -lik.hessian(theta);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return;
    const Eigen::VectorXd delta = llt.solve(g);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Eigen::VectorXd cand = theta + t * delta;
      const double v = lik.value(cand);
      if (std::isfinite(v) && v >= value - 1e-12 * std::max(1.0, std::fabs(value))) {
        const Eigen::VectorXd g_cand = lik.gradient(cand);
        if (g_cand.lpNorm<Eigen::Infinity>() <= g.lpNorm<Eigen::Infinity>() || v > value) {
          theta = cand;
          value = v;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) return;
  }
}

FixedFit fit_fixed(const ModelSpec& spec, const Dataset& data, const FitConfig& config) {
  const TobitLikelihood lik(spec, data);
  const double n = static_cast<double>(lik.n_obs());
  const Objective objective = [&lik, n](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const double v = lik.value_and_gradient(x, grad);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    grad /= -n;
    return -v / n;
  };
  BfgsOptions options;
  options.max_iter = config.max_iter;
  options.grad_tol = config.grad_tol;

  const Eigen::VectorXd start = initial_theta(spec, data).flat();
  FixedFit best;
  for (int attempt = 0; attempt <= config.restarts; ++attempt) {
    Eigen::VectorXd x0 = start;
    if (attempt > 0) {
      Rng rng(config.seed, static_cast<std::uint64_t>(attempt));
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] += 0.1 * rng.normal();
    }
    const BfgsResult res = minimize_bfgs(objective, x0, options);
    if (res.x.size() != x0.size() || !std::isfinite(res.f)) continue;
    Eigen::VectorXd theta = res.x;
    double value = -res.f * n;
    if (config.newton_steps > 0) newton_refine(lik, theta, value, config.newton_steps);
    const Eigen::VectorXd g = lik.gradient(theta);
    FixedFit cur;
    cur.theta = theta;
    cur.loglik = value;
    cur.score_max_norm = g.allFinite() ? g.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    cur.iterations = res.iterations;
    cur.converged = cur.score_max_norm / n <= config.grad_tol;
    const bool better = best.theta.size() == 0 || (cur.converged && !best.converged) ||
                        (cur.converged == best.converged && cur.loglik > best.loglik);
    if (better) best = cur;
    if (best.converged) break;
  }
  return best;
}

}  // namespace

double information_aic(double loglik, int n_params) { return -2.0 * loglik + 2.0 * n_params; }

double information_bic(double loglik, int n_params, Eigen::Index n_obs) {
  return -2.0 * loglik + n_params * std::log(static_cast<double>(n_obs));
}

void check_full_rank(const Eigen::MatrixXd& design, const std::vector<std::string>& names,
                     const std::string& label) {
  if (design.cols() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == design.cols()) return;
  const auto labels = default_names(names, design.cols(), "col");
  std::ostringstream os;
  os << label << " design matrix has rank " << rank << " < " << design.cols() << " columns; collinear:";
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = rank; j < design.cols(); ++j) os << ' ' << labels[perm[j]];
  throw Error(ErrorCategory::RankDeficient, os.str());
}

ParamVector initial_theta(const ModelSpec& spec, const Dataset& data) {
  const Eigen::Index k = data.X.cols(), l = data.W.cols();
  ParamVector theta{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(l)};

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (!data.censored[i]) rows.push_back(i);
  const auto n_u = static_cast<Eigen::Index>(rows.size());
  if (n_u < k) return theta;

  Eigen::MatrixXd Xu(n_u, k);
  Eigen::VectorXd y(n_u);
  for (Eigen::Index r = 0; r < n_u; ++r) {
    Xu.row(r) = data.X.row(rows[r]);
    y[r] = std::log(data.t[rows[r]]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xu);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) return theta;
  theta.beta = qr.solve(y);

  const double rss = (y - Xu * theta.beta).squaredNorm();
  const double dof = n_u > k ? static_cast<double>(n_u - k) : static_cast<double>(n_u);
  // log T has variance phi * Var(Z); divide out the family's Var(Z) when finite
  double phi0 = rss / dof;
  const double var_z = spec.family.variance();
  if (std::isfinite(var_z) && var_z > 0.0) phi0 /= var_z;
  phi0 = std::max(phi0, kMinDispersion);
  theta.kappa[0] = std::log(phi0);
  theta.beta[0] += std::sqrt(phi0) * spec.family.quantile(spec.q);
  return theta;
}

FitResult fit(const ModelSpec& spec, const Dataset& data, const FitConfig& config) {
  data.validate();
  if (!(config.grad_tol > 0.0)) throw Error(ErrorCategory::Config, "grad_tol must be positive");
  if (config.max_iter < 1) throw Error(ErrorCategory::Config, "max_iter must be at least 1");
  const auto beta_names = default_names(data.x_names, data.X.cols(), "x");
  const auto kappa_names = default_names(data.w_names, data.W.cols(), "w");
  check_full_rank(data.X, beta_names, "quantile (X)");
  check_full_rank(data.W, kappa_names, "dispersion (W)");
  const Eigen::Index p = data.X.cols() + data.W.cols();
  const Eigen::Index n_unc = data.size() - data.censored_count();
  if (n_unc == 0) throw Error(ErrorCategory::Data, "all observations are censored");
  if (p > n_unc) {
    std::ostringstream os;
    os << "need at least " << p << " uncensored observations, have " << n_unc;
    throw Error(ErrorCategory::Data, os.str());
  }

  std::vector<double> grid = config.xi_grid;
  if (grid.empty() || !spec.family.has_extra_parameter()) grid = {spec.family.xi()};

  std::vector<ProfilePoint> trace;
  FixedFit best;
  double best_xi = grid.front();
  std::string last_error;
  for (double xi : grid) {
    ModelSpec spec_j = spec;
    spec_j.family = spec.family.with_xi(xi);
    FixedFit cur;
    try {
      cur = fit_fixed(spec_j, data, config);
    } catch (const DomainError& e) {
      last_error = e.what();
    }
    trace.push_back({xi, cur.converged ? cur.loglik : kNaN, cur.converged});
    const bool better = best.theta.size() == 0 || (cur.converged && !best.converged) ||
                        (cur.converged == best.converged && cur.loglik > best.loglik);
    if (cur.theta.size() > 0 && better) {
      best = cur;
      best_xi = xi;
    }
  }

  FitResult result;
  result.family = spec.family.with_xi(best_xi);
  result.xi_hat = result.family.xi();
  result.q = spec.q;
  result.psi = data.psi;
  result.n_params = static_cast<int>(p);
  result.n_obs = data.size();
  result.n_censored = data.censored_count();
  result.profile_trace = std::move(trace);
  result.beta_names = beta_names;
  result.kappa_names = kappa_names;
  result.se = Eigen::VectorXd::Constant(p, kNaN);

  if (best.theta.size() == 0) {
    throw NonConvergenceError("likelihood could not be evaluated at any start" +
                                  (last_error.empty() ? std::string() : ": " + last_error),
                              result);
  }
  result.theta_hat = ParamVector::from_flat(best.theta, data.X.cols());
  result.loglik = best.loglik;
  result.aic = information_aic(best.loglik, result.n_params);
  result.bic = information_bic(best.loglik, result.n_params, result.n_obs);
  result.iterations = best.iterations;
  result.score_max_norm = best.score_max_norm;
  result.converged = best.converged;

  if (!best.converged) {
    std::ostringstream os;
    os << "BFGS did not reach max|score|/n <= " << config.grad_tol << " after " << config.restarts + 1
       << " start(s); best max|score|/n = " << best.score_max_norm / static_cast<double>(result.n_obs);
    throw NonConvergenceError(os.str(), std::move(result));
  }

  if (config.compute_se) {
    const TobitLikelihood lik(result.spec(), data);
    const Eigen::MatrixXd info = -lik.hessian(best.theta);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() == Eigen::Success) {
      result.covariance = llt.solve(Eigen::MatrixXd::Identity(p, p));
      result.covariance = 0.5 * (result.covariance + result.covariance.transpose());
      result.se = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
      result.se_available = (result.se.array() > 0.0).all();
    }
    if (!result.se_available) {
      result.warnings.emplace_back(
          "singular-information: -H is not positive definite at the estimate; standard errors omitted");
    }
  }
  return result;
}

QSelection select_q(const ModelSpec& spec_template, const Dataset& data, const FitConfig& config,
                    const std::vector<double>& q_grid) {
  if (q_grid.empty()) throw Error(ErrorCategory::Config, "q grid is empty");
  for (double q : q_grid)
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCategory::Config, "q grid values must lie in (0,1)");

  QSelection out;
  bool have_best = false;
  for (double q : q_grid) {
    ModelSpec spec = spec_template;
    spec.q = q;
    QTraceEntry entry;
    entry.q = q;
    try {
      FitResult res = fit(spec, data, config);
      entry.loglik = res.loglik;
      entry.aic = res.aic;
      entry.bic = res.bic;
      entry.xi_hat = res.xi_hat;
      entry.converged = true;
      bool better = !have_best;
      if (have_best) {
        const double d_aic = res.aic - out.best.aic;
        if (d_aic < -kAicTieTolerance) better = true;
        else if (std::fabs(d_aic) <= kAicTieTolerance) {
          const double d_bic = res.bic - out.best.bic;
          better = d_bic < -kAicTieTolerance ||
                   (std::fabs(d_bic) <= kAicTieTolerance && q < out.q_otm);
        }
      }
      if (better) {
        out.best = std::move(res);
        out.q_otm = q;
        have_best = true;
      }
    } catch (const NonConvergenceError& e) {
      entry.loglik = entry.aic = entry.bic = kNaN;
      entry.error = e.what();
    }
    out.trace.push_back(std::move(entry));
  }
  if (!have_best) throw Error(ErrorCategory::NonConvergence, "fit failed at every q of the grid");
  return out;
}

}  // namespace lsqtobit
