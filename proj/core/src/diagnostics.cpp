#include "lsqtobit/diagnostics.hpp"

#include "lsqtobit/errors.hpp"
#include "lsqtobit/rng.hpp"
#include "special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsqtobit {

namespace {

const double kLogSurvivalFloor = std::log(1e-300);

double mt_transform(double r_m, bool uncensored) {
  double v = uncensored ? -2.0 * (r_m + std::log1p(-r_m)) : -2.0 * r_m;
  v = std::max(v, 0.0);
  if (r_m > 0.0) return std::sqrt(v);
  if (r_m < 0.0) return -std::sqrt(v);
  return 0.0;
}

}  // namespace

ResidualReport mt_residuals(const ModelSpec& spec, const Dataset& data, const ParamVector& theta) {
  const TobitLikelihood lik(spec, data);
  const Linearization lin = lik.linearize(theta.flat());
  const Eigen::Index n = data.size();
  ResidualReport report;
  report.r_m.resize(n);
  report.r_mt.resize(n);
  report.clamped.assign(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    // S(t) = 1 - G(z) = G(-z)
    double log_s = spec.family.log_cdf(-lin.z[i]);
    if (!(log_s >= kLogSurvivalFloor)) {
      log_s = kLogSurvivalFloor;
      report.clamped[i] = 1;
    }
    const bool uncensored = !data.censored[i];
    const double r_m = (uncensored ? 1.0 : 0.0) + log_s;
    report.r_m[i] = r_m;
    report.r_mt[i] = mt_transform(r_m, uncensored);
  }
  return report;
}

ResidualReport mt_residuals(const Dataset& data, const FitResult& fit) {
  return mt_residuals(fit.spec(), data, fit.theta_hat);
}

Dataset simulate_responses(const ModelSpec& spec, const Dataset& design, const ParamVector& theta,
                           std::uint64_t seed) {
  const Eigen::Index n = design.size();
  const Eigen::VectorXd log_Q = design.X * theta.beta;
  const Eigen::VectorXd log_phi = design.W * theta.kappa;
  const double z_q = spec.family.quantile(spec.q);
  Dataset out = design;
  out.psi = spec.psi;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = spec.family.quantile(rng.uniform());
    const double t = std::exp(log_Q[i] + std::exp(0.5 * log_phi[i]) * (z - z_q));
    const bool cens = !(t > spec.psi);
    out.censored[i] = cens ? 1 : 0;
    out.t[i] = cens ? spec.psi : t;
  }
  return out;
}

double order_statistic_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  const double h = (n + 1.0) * p;
  const double j = std::floor(h);
  if (j < 1.0) return sorted.front();
  if (j >= n) return sorted.back();
  const auto idx = static_cast<std::size_t>(j);
  return sorted[idx - 1] + (h - j) * (sorted[idx] - sorted[idx - 1]);
}

double blom_position(Eigen::Index i, Eigen::Index n) {
  return detail::norm_quantile((static_cast<double>(i) - 0.375) / (static_cast<double>(n) + 0.25));
}

double qq_correlation(const Eigen::VectorXd& residuals) {
  const Eigen::Index n = residuals.size();
  if (n < 2) throw DomainError("QQ correlation needs at least two residuals");
  std::vector<double> r(residuals.data(), residuals.data() + n);
  std::sort(r.begin(), r.end());
  Eigen::VectorXd a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a[i] = r[i];
    b[i] = blom_position(i + 1, n);
  }
  a.array() -= a.mean();
  b.array() -= b.mean();
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

double envelope_coverage(const ResidualReport& report) {
  if (report.envelope.empty()) throw DomainError("report has no envelope");
  std::size_t inside = 0;
  for (const auto& pt : report.envelope)
    if (pt.observed >= pt.lower && pt.observed <= pt.upper) ++inside;
  return static_cast<double>(inside) / static_cast<double>(report.envelope.size());
}

ResidualReport simulated_envelope(const Dataset& data, const FitResult& fit, const EnvelopeOptions& options) {
  if (options.n_sim < 19) throw DomainError("envelope needs at least 19 simulated samples");
  if (!(options.level > 0.0 && options.level < 1.0)) throw DomainError("envelope level must lie in (0,1)");

  const ModelSpec spec = fit.spec();
  ResidualReport report = mt_residuals(spec, data, fit.theta_hat);
  const Eigen::Index n = data.size();
  const auto n_sim = static_cast<std::size_t>(options.n_sim);

  // sims[i][s]: i-th order statistic of replicate s
  std::vector<std::vector<double>> sims(n, std::vector<double>(n_sim));
  std::vector<double> sorted(n);
  for (std::size_t s = 0; s < n_sim; ++s) {
    const Dataset replicate = simulate_responses(spec, data, fit.theta_hat, mix_seed(options.seed, s));
    ParamVector theta = fit.theta_hat;
    if (options.refit) {
      try {
        FitConfig cfg = options.refit_config;
        cfg.compute_se = false;
        theta = lsqtobit::fit(spec, replicate, cfg).theta_hat;
      } catch (const Error&) {
        // keep theta_hat for a replicate that cannot be refitted
      }
    }
    const ResidualReport rep = mt_residuals(spec, replicate, theta);
    std::copy(rep.r_mt.data(), rep.r_mt.data() + n, sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < n; ++i) sims[i][s] = sorted[i];
  }

  std::vector<double> observed(report.r_mt.data(), report.r_mt.data() + n);
  std::sort(observed.begin(), observed.end());
  report.envelope.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& column = sims[i];
    std::sort(column.begin(), column.end());
    EnvelopePoint& pt = report.envelope[i];
    pt.theoretical = blom_position(i + 1, n);
    pt.observed = observed[i];
    pt.lower = order_statistic_quantile(column, 0.5 * options.level);
    pt.median = order_statistic_quantile(column, 0.5);
    pt.upper = order_statistic_quantile(column, 1.0 - 0.5 * options.level);
  }
  report.n_sim = options.n_sim;
  report.level = options.level;
  return report;
}

}  // namespace lsqtobit
