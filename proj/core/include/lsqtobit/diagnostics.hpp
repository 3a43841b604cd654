#pragma once

#include "lsqtobit/estimator.hpp"
#include "lsqtobit/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace lsqtobit {

/// One row of the QQ plot: the i-th smallest observed residual against
/// its normal plotting position and the simulated band.
struct EnvelopePoint {
  double theoretical = 0.0;
  double observed = 0.0;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
};

struct ResidualReport {
  Eigen::VectorXd r_mt;  // martingale-type residuals, data order
  Eigen::VectorXd r_m;   // martingale residuals, data order
  /// 1 where the fitted survival underflowed and was clamped at 1e-300.
  std::vector<std::uint8_t> clamped;
  std::vector<EnvelopePoint> envelope;  // empty unless simulated
  int n_sim = 0;
  double level = 0.0;
};

/// r_M = rho + log S(t), r_MT = sign(r_M) sqrt(-2 [r_M + rho log(rho - r_M)]),
/// rho = 1 for uncensored cases and 0 (with 0 log 0 = 0) for censored ones.
ResidualReport mt_residuals(const ModelSpec& spec, const Dataset& data, const ParamVector& theta);
ResidualReport mt_residuals(const Dataset& data, const FitResult& fit);

struct EnvelopeOptions {
  int n_sim = 99;
  /// Bands are the level/2 and 1 - level/2 empirical quantiles.
  double level = 0.05;
  std::uint64_t seed = 1;
  /// Refit each simulated sample instead of reusing theta_hat.
  bool refit = false;
  FitConfig refit_config{};
};

/// Residuals of `data` plus pointwise bands from samples simulated under
/// the fitted model (same X, W and psi).
ResidualReport simulated_envelope(const Dataset& data, const FitResult& fit, const EnvelopeOptions& options);

/// Draws a new response vector from the fitted model, censoring at psi.
Dataset simulate_responses(const ModelSpec& spec, const Dataset& design, const ParamVector& theta,
                           std::uint64_t seed);

/// Blom plotting position Phi^{-1}((i - 3/8) / (n + 1/4)), i is 1-based.
double blom_position(Eigen::Index i, Eigen::Index n);

/// Pearson correlation of the sorted residuals with Blom positions.
double qq_correlation(const Eigen::VectorXd& residuals);

/// Fraction of observed order statistics inside [lower, upper].
double envelope_coverage(const ResidualReport& report);

/// Sample quantile with plotting position (N + 1) p, clamped to the
/// extremes. `sorted` must be ascending.
double order_statistic_quantile(const std::vector<double>& sorted, double p);

}  // namespace lsqtobit
