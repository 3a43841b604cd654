// lsqtobit: batch front end for fitting, q profiling, diagnostics and the
// simulation study.

#include "lsqtobit/diagnostics.hpp"
#include "lsqtobit/errors.hpp"
#include "lsqtobit/estimator.hpp"
#include "lsqtobit/io.hpp"
#include "lsqtobit/montecarlo.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace lsqtobit;
namespace fs = std::filesystem;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Parse: return 3;
    case ErrorCategory::Data: return 4;
    case ErrorCategory::RankDeficient: return 5;
    case ErrorCategory::NonConvergence: return 6;
    case ErrorCategory::SingularInformation: return 7;
    case ErrorCategory::Io: return 8;
    case ErrorCategory::Domain: return 9;
  }
  return 1;
}

GeneratorFamily make_family(const RunConfig& c, std::vector<double>& grid) {
  const FamilyKind kind = parse_family_kind(c.family);
  grid.clear();
  if (kind == FamilyKind::LogNormal) return GeneratorFamily::log_normal();
  if (c.xi.empty() || c.xi == "profile") {
    grid = default_xi_grid(kind);
    return GeneratorFamily(kind, grid.front());
  }
  const auto values = parse_grid(c.xi);
  if (values.size() > 1) grid = values;
  return GeneratorFamily(kind, values.front());
}

double single_q(const RunConfig& c) {
  const auto qs = parse_grid(c.q);
  if (qs.size() != 1) throw Error(ErrorCategory::Config, "fit takes a single q; use profile-q for a grid");
  return qs.front();
}

void require_data(const RunConfig& c) {
  if (c.data_path.empty()) throw Error(ErrorCategory::Config, "--data is required for " + command_name(c.command));
}

void print_summary(const FitResult& fr) {
  std::printf("family %s  xi_hat %.6g  q %.6g  psi %.6g\n", std::string(fr.family.name()).c_str(), fr.xi_hat, fr.q,
              fr.psi);
  std::printf("n %ld  censored %ld  loglik %.6f  AIC %.6f  BIC %.6f  (p = %d: beta and kappa; xi not counted)\n",
              static_cast<long>(fr.n_obs), static_cast<long>(fr.n_censored), fr.loglik, fr.aic, fr.bic, fr.n_params);
  for (const auto& r : estimate_rows(fr))
    std::printf("  %-24s % .6g  (%.6g) %s\n", r.parameter.c_str(), r.estimate, r.se, r.significance.c_str());
  for (const auto& w : fr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

ResidualReport diagnostics_for(const Dataset& data, const FitResult& fr, const RunConfig& c) {
  if (c.nsim_envelope <= 0) return mt_residuals(data, fr);
  EnvelopeOptions opt;
  opt.n_sim = c.nsim_envelope;
  opt.seed = c.seed;
  return simulated_envelope(data, fr, opt);
}

FitConfig fit_config(const RunConfig& c, const std::vector<double>& grid) {
  FitConfig fc;
  fc.xi_grid = grid;
  fc.seed = c.seed;
  return fc;
}

int run_fit(const RunConfig& c) {
  require_data(c);
  std::vector<double> grid;
  const GeneratorFamily family = make_family(c, grid);
  const Dataset data = ingest_csv(c.data_path, c);
  const FitResult fr = fit({family, single_q(c), data.psi}, data, fit_config(c, grid));
  const ResidualReport rep = diagnostics_for(data, fr, c);
  emit_report(fr, rep, data, c.output_dir);
  print_summary(fr);
  return 0;
}

int run_profile_q(const RunConfig& c) {
  require_data(c);
  std::vector<double> grid;
  const GeneratorFamily family = make_family(c, grid);
  const Dataset data = ingest_csv(c.data_path, c);
  const auto qs = parse_grid(c.q);
  const QSelection sel = select_q({family, qs.front(), data.psi}, data, fit_config(c, grid), qs);
  fs::create_directories(c.output_dir);
  write_q_profile_csv(fs::path(c.output_dir) / "q_profile.csv", sel);
  const ResidualReport rep = diagnostics_for(data, sel.best, c);
  emit_report(sel.best, rep, data, c.output_dir);
  std::printf("q_otm %.6g\n", sel.q_otm);
  print_summary(sel.best);
  return 0;
}

int run_diagnose(const RunConfig& c) {
  require_data(c);
  const Dataset data = ingest_csv(c.data_path, c);
  FitResult fr;
  if (!c.fit_path.empty()) {
    fr = read_fit_json(c.fit_path);
    fr.psi = data.psi;
  } else {
    std::vector<double> grid;
    const GeneratorFamily family = make_family(c, grid);
    fr = fit({family, single_q(c), data.psi}, data, fit_config(c, grid));
  }
  const ResidualReport rep = diagnostics_for(data, fr, c);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_residuals_csv(dir / "residuals.csv", rep, data);
  if (!rep.envelope.empty()) write_envelope_csv(dir / "qq_envelope.csv", rep);
  write_histogram_csv(dir / "histogram.csv", data);
  std::printf("MT residuals: n %ld  QQ correlation %.6f", static_cast<long>(rep.r_mt.size()), qq_correlation(rep.r_mt));
  if (!rep.envelope.empty()) std::printf("  envelope coverage %.4f", envelope_coverage(rep));
  std::printf("\n");
  return 0;
}

int run_simulate(const RunConfig& c) {
  std::vector<Scenario> scenarios;
  if (!c.scenario_path.empty()) {
    std::ifstream in(c.scenario_path);
    if (!in) throw Error(ErrorCategory::Io, "cannot open scenario file '" + c.scenario_path + "'");
    scenarios = parse_scenarios(in);
  } else {
    std::vector<double> grid;
    const GeneratorFamily family = make_family(c, grid);
    if (!grid.empty() && family.has_extra_parameter())
      throw Error(ErrorCategory::Config, "simulate needs a fixed --xi for " + c.family);
    for (double cens : c.censoring)
      for (double q : parse_grid(c.q))
        for (double n : c.sample_sizes) {
          Scenario sc;
          sc.family = family;
          sc.q = q;
          sc.n = static_cast<Eigen::Index>(n);
          sc.censor_prop = cens;
          sc.nrep = c.nrep;
          sc.seed = c.seed;
          sc.validate();
          scenarios.push_back(sc);
        }
  }
  std::vector<McResult> results;
  for (const auto& sc : scenarios) {
    std::fprintf(stderr, "%s censoring %.2f q %.2f n %ld ...\n", sc.family.label().c_str(), sc.censor_prop, sc.q,
                 static_cast<long>(sc.n));
    results.push_back(run_scenario(sc));
    if (results.back().n_failed > 0)
      std::fprintf(stderr, "  %d of %d replicates did not converge and were excluded\n", results.back().n_failed,
                   sc.nrep);
  }
  fs::create_directories(c.output_dir);
  const fs::path path = fs::path(c.output_dir) / "mc_table.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
  write_mc_table(out, results);
  write_mc_table(std::cout, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-symmetric quantile tobit regression"};
  app.set_version_flag("--version", "lsqtobit 0.1.0");

  std::string command;
  std::string config_path;
  std::map<std::string, std::string> flags;
  app.add_option("command", command, "fit | profile-q | simulate | diagnose")
      ->required()
      ->check(CLI::IsMember({"fit", "profile-q", "simulate", "diagnose"}));
  app.add_option("--config", config_path, "key=value file; command-line flags win");

  const std::vector<std::pair<std::string, std::string>> options{
      {"data", "input CSV with a header row"},
      {"response", "response column"},
      {"censor-col", "censoring indicator column (nonzero = censored)"},
      {"psi", "left-censoring threshold"},
      {"shift", "constant added to the response before censoring"},
      {"qcov", "quantile covariates, comma separated"},
      {"dcov", "dispersion covariates, comma separated"},
      {"family", "lognormal | logt | logpe | ebs"},
      {"xi", "extra parameter: value, list, a:b:step or 'profile'"},
      {"q", "quantile level, or a grid for profile-q / simulate"},
      {"out", "output directory"},
      {"seed", "random seed"},
      {"nrep", "replicates per simulation cell"},
      {"nsim-envelope", "simulated samples for the QQ envelope (0 disables)"},
      {"fit", "fit.json written by an earlier fit (diagnose)"},
      {"scenario", "scenario file (simulate)"},
      {"n", "sample sizes for simulate"},
      {"censoring", "censoring fractions for simulate"},
  };
  for (const auto& [name, help] : options) app.add_option("--" + name, flags[name], help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorCategory::Config);
  }

  try {
    RunConfig config;
    if (!config_path.empty())
      for (const auto& [key, value] : read_config_file(config_path)) apply_setting(config, key, value);
    for (const auto& [name, help] : options) {
      if (app.get_option("--" + name)->count() > 0) apply_setting(config, name, flags[name]);
    }
    config.command = parse_command(command);
    switch (config.command) {
      case Command::Fit: return run_fit(config);
      case Command::ProfileQ: return run_profile_q(config);
      case Command::Simulate: return run_simulate(config);
      case Command::Diagnose: return run_diagnose(config);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", std::string(category_name(e.category())).c_str(), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 1;
}
