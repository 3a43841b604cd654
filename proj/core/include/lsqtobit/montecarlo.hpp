#pragma once

#include "lsqtobit/generators.hpp"
#include "lsqtobit/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace lsqtobit {

/// One cell of the simulation study. Covariates are redrawn for every
/// replicate: x ~ Bernoulli(0.5) enters the quantile, w ~ Uniform(0,1) the
/// dispersion.
struct Scenario {
  GeneratorFamily family;
  double q = 0.5;
  Eigen::Index n = 600;
  double censor_prop = 0.1;
  Eigen::VectorXd beta_true = Eigen::Vector2d(1.0, 0.5);
  Eigen::VectorXd kappa_true = Eigen::Vector2d(1.0, 1.5);
  int nrep = 500;
  std::uint64_t seed = 1;
  std::size_t calibration_draws = 1'000'000;
  /// Censoring threshold; calibrated from censor_prop when NaN.
  double psi = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

struct ParameterSummary {
  std::string name;
  double true_value = 0.0;
  double bias = 0.0;
  double mse = 0.0;
};

struct McResult {
  Scenario scenario;
  double psi = 0.0;
  std::vector<ParameterSummary> params;  // beta_0.., kappa_0..
  int nrep_effective = 0;
  int n_failed = 0;
  double mean_censoring = 0.0;  // realized fraction over all replicates
};

/// Empirical censor_prop-quantile of pre-simulated latent responses under
/// the true parameters.
double calibrate_psi(const Scenario& scenario);

/// One replicate sample of the scenario, censored at psi.
Dataset simulate_scenario(const Scenario& scenario, double psi, std::uint64_t replicate);

/// Fits every replicate at the true family and xi and summarizes bias and
/// MSE over the converged replicates. Throws Error(NonConvergence) when
/// fewer than half of the replicates converge.
McResult run_scenario(const Scenario& scenario);

/// Reads key=value scenario specs. `q`, `n` and `censoring` accept comma
/// lists; one scenario is produced per combination.
std::vector<Scenario> parse_scenarios(std::istream& in);

/// CSV with columns family,censoring,q,parameter,n,bias,mse,nrep_effective.
void write_mc_table(std::ostream& out, const std::vector<McResult>& results);

struct SyntheticSample {
  Dataset data;
  /// Raw covariate columns (no intercept), in `covariate_names` order.
  Eigen::MatrixXd covariates;
  std::vector<std::string> covariate_names;
  /// Response on the original scale: 0 for censored cases, t - 1 otherwise.
  Eigen::VectorXd response;
};

/// Labor-supply shaped synthetic sample: 753 rows, 325 censored at psi = 1
/// after the +1 shift, five covariates (age, educ, exper, kidslt6,
/// nwifeinc) and dispersion driven by age, kidslt6 and exper.
SyntheticSample make_labor_supply_sample(std::uint64_t seed);

/// Writes the synthetic sample as CSV: wage plus the five covariates.
void write_labor_supply_csv(std::ostream& out, const SyntheticSample& sample);

}  // namespace lsqtobit
