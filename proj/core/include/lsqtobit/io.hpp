#pragma once

#include "lsqtobit/diagnostics.hpp"
#include "lsqtobit/estimator.hpp"
#include "lsqtobit/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsqtobit {

enum class Command { Fit, ProfileQ, Simulate, Diagnose };

Command parse_command(const std::string& name);
std::string command_name(Command command);

/// Everything a batch run needs. Filled from a key=value config file and
/// then from command-line flags, flags winning.
struct RunConfig {
  Command command = Command::Fit;
  std::string data_path;
  std::string response;
  std::string censor_col;      // empty: censor by threshold psi
  std::optional<double> psi;
  double shift = 0.0;          // added to the response before censoring
  std::vector<std::string> quantile_covariates;
  std::vector<std::string> dispersion_covariates;
  std::string family = "lognormal";
  std::string xi;              // number, "profile", list or a:b:step grid
  std::string q = "0.5";       // number, list or a:b:step grid
  std::string output_dir = "lsqtobit-out";
  std::uint64_t seed = 1;
  int nrep = 500;
  int nsim_envelope = 99;
  std::string fit_path;        // diagnose: fit.json written by `fit`
  std::string scenario_path;   // simulate: scenario spec file
  std::vector<double> sample_sizes{50, 300, 600};   // simulate
  std::vector<double> censoring{0.1, 0.4};          // simulate
};

/// Applies one config entry. Unknown keys throw Error(Config).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// key=value lines, '#' comments.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// "0.5", "0.1,0.5,0.9" or "a:b:step" (inclusive of b within rounding).
std::vector<double> parse_grid(const std::string& text);

std::vector<std::string> split_list(const std::string& text);

/// Reads a comma-separated file with a header row into a Dataset with
/// intercept columns prepended to X and W.
Dataset ingest_csv(const std::filesystem::path& path, const RunConfig& config);

struct EstimateRow {
  std::string parameter;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 0.0;
  std::string significance;
};

/// "*" at 5%, "**" at 10%, empty otherwise, from a two-sided Wald test.
std::string significance_stars(double p_value);

std::vector<EstimateRow> estimate_rows(const FitResult& fit);

/// Writes estimates.csv, fit.json, qq_envelope.csv, residuals.csv and
/// histogram.csv into `dir`.
void emit_report(const FitResult& fit, const ResidualReport& residuals, const Dataset& data,
                 const std::filesystem::path& dir);

void write_estimates_csv(const std::filesystem::path& path, const FitResult& fit);
std::vector<EstimateRow> read_estimates_csv(const std::filesystem::path& path);
void write_fit_json(const std::filesystem::path& path, const FitResult& fit);
/// Restores the estimate, family, q and psi of a saved fit.
FitResult read_fit_json(const std::filesystem::path& path);
void write_envelope_csv(const std::filesystem::path& path, const ResidualReport& report);
void write_residuals_csv(const std::filesystem::path& path, const ResidualReport& report, const Dataset& data);
/// Sturges-binned response.
void write_histogram_csv(const std::filesystem::path& path, const Dataset& data);
void write_q_profile_csv(const std::filesystem::path& path, const QSelection& selection);

}  // namespace lsqtobit
