#include "lsqtobit/montecarlo.hpp"

#include "lsqtobit/errors.hpp"
#include "lsqtobit/estimator.hpp"
#include "lsqtobit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lsqtobit {

namespace {

// stream ids; replicates use 1..nrep
constexpr std::uint64_t kCalibrationStream = 0xC0FFEEULL << 32;
constexpr std::uint64_t kFitStream = 0xF17ULL << 40;

double draw_latent(const Scenario& sc, double z_q, Rng& rng, double& x, double& w) {
  x = rng.bernoulli(0.5) ? 1.0 : 0.0;
  w = rng.uniform();
  const double log_Q = sc.beta_true[0] + sc.beta_true[1] * x;
  const double log_phi = sc.kappa_true[0] + sc.kappa_true[1] * w;
  const double z = sc.family.quantile(rng.uniform());
  return std::exp(log_Q + std::exp(0.5 * log_phi) * (z - z_q));
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::Config, "scenario key '" + key + "': cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCategory::Config, "scenario key '" + key + "' is empty");
  return out;
}

}  // namespace

void Scenario::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCategory::Config, "scenario q must lie in (0,1)");
  if (!(censor_prop > 0.0 && censor_prop < 1.0))
    throw Error(ErrorCategory::Config, "scenario censor_prop must lie in (0,1)");
  if (n < 4) throw Error(ErrorCategory::Config, "scenario n must be at least 4");
  if (nrep < 1) throw Error(ErrorCategory::Config, "scenario nrep must be at least 1");
  if (beta_true.size() != 2 || kappa_true.size() != 2)
    throw Error(ErrorCategory::Config, "scenario needs two beta and two kappa values");
  if (calibration_draws < 1) throw Error(ErrorCategory::Config, "calibration_draws must be positive");
}

double calibrate_psi(const Scenario& scenario) {
  scenario.validate();
  const double z_q = scenario.family.quantile(scenario.q);
  Rng rng(scenario.seed, kCalibrationStream);
  std::vector<double> draws(scenario.calibration_draws);
  double x = 0.0, w = 0.0;
  for (auto& t : draws) t = draw_latent(scenario, z_q, rng, x, w);
  const auto k = static_cast<std::size_t>(
      std::floor(scenario.censor_prop * static_cast<double>(draws.size())));
  const auto idx = std::min(k, draws.size() - 1);
  std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(idx), draws.end());
  return draws[idx];
}

Dataset simulate_scenario(const Scenario& scenario, double psi, std::uint64_t replicate) {
  const double z_q = scenario.family.quantile(scenario.q);
  Rng rng(scenario.seed, replicate);
  const Eigen::Index n = scenario.n;
  Dataset data;
  data.t.resize(n);
  data.censored.assign(n, 0);
  data.X.resize(n, 2);
  data.W.resize(n, 2);
  data.psi = psi;
  data.x_names = {"(Intercept)", "x"};
  data.w_names = {"(Intercept)", "w"};
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = 0.0, w = 0.0;
    const double t = draw_latent(scenario, z_q, rng, x, w);
    data.X(i, 0) = 1.0;
    data.X(i, 1) = x;
    data.W(i, 0) = 1.0;
    data.W(i, 1) = w;
    const bool cens = !(t > psi);
    data.censored[i] = cens ? 1 : 0;
    data.t[i] = cens ? psi : t;
  }
  return data;
}

McResult run_scenario(const Scenario& scenario) {
  scenario.validate();
  McResult result;
  result.scenario = scenario;
  result.psi = std::isfinite(scenario.psi) ? scenario.psi : calibrate_psi(scenario);

  const ModelSpec spec{scenario.family, scenario.q, result.psi};
  FitConfig config;
  config.compute_se = false;

  Eigen::VectorXd truth(4);
  truth << scenario.beta_true, scenario.kappa_true;
  Eigen::VectorXd sum_err = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(4);
  double censored_total = 0.0;

  for (int r = 0; r < scenario.nrep; ++r) {
    const auto rep = static_cast<std::uint64_t>(r) + 1;
    const Dataset data = simulate_scenario(scenario, result.psi, rep);
    censored_total += static_cast<double>(data.censored_count()) / static_cast<double>(data.size());
    config.seed = mix_seed(scenario.seed, kFitStream + rep);
    try {
      const FitResult fit = lsqtobit::fit(spec, data, config);
      const Eigen::VectorXd err = fit.theta_hat.flat() - truth;
      sum_err += err;
      sum_sq += err.cwiseProduct(err);
      ++result.nrep_effective;
    } catch (const Error&) {
      ++result.n_failed;
    }
  }
  result.mean_censoring = censored_total / scenario.nrep;

  if (2 * result.nrep_effective < scenario.nrep) {
    std::ostringstream os;
    os << "only " << result.nrep_effective << " of " << scenario.nrep << " replicates converged for "
       << scenario.family.label() << ", q=" << scenario.q << ", n=" << scenario.n;
    throw Error(ErrorCategory::NonConvergence, os.str());
  }
  const char* names[] = {"beta0", "beta1", "kappa0", "kappa1"};
  const double denom = result.nrep_effective;
  for (int j = 0; j < 4; ++j) {
    result.params.push_back({names[j], truth[j], sum_err[j] / denom, sum_sq[j] / denom});
  }
  return result;
}

std::vector<Scenario> parse_scenarios(std::istream& in) {
  Scenario base;
  std::string family_name = "lognormal";
  double xi = 0.0;
  std::vector<double> qs{0.5}, ns{600}, cens{0.1};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::Config, "scenario line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "family") family_name = value;
    else if (key == "xi") xi = parse_list(value, key).front();
    else if (key == "q") qs = parse_list(value, key);
    else if (key == "n") ns = parse_list(value, key);
    else if (key == "censoring" || key == "censor_prop") cens = parse_list(value, key);
    else if (key == "nrep") base.nrep = static_cast<int>(parse_list(value, key).front());
    else if (key == "seed") base.seed = static_cast<std::uint64_t>(parse_list(value, key).front());
    else if (key == "calibration_draws")
      base.calibration_draws = static_cast<std::size_t>(parse_list(value, key).front());
    else if (key == "beta") {
      const auto v = parse_list(value, key);
      base.beta_true = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (key == "kappa") {
      const auto v = parse_list(value, key);
      base.kappa_true = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else {
      throw Error(ErrorCategory::Config, "scenario line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  base.family = GeneratorFamily(parse_family_kind(family_name), xi);
  std::vector<Scenario> out;
  for (double c : cens)
    for (double q : qs)
      for (double n : ns) {
        Scenario sc = base;
        sc.censor_prop = c;
        sc.q = q;
        sc.n = static_cast<Eigen::Index>(n);
        sc.validate();
        out.push_back(sc);
      }
  return out;
}

void write_mc_table(std::ostream& out, const std::vector<McResult>& results) {
  out << "family,censoring,q,parameter,n,bias,mse,nrep_effective\n";
  for (const auto& r : results) {
    for (const auto& p : r.params) {
      out << r.scenario.family.name() << ',' << std::setprecision(6) << r.scenario.censor_prop << ','
          << r.scenario.q << ',' << p.name << ',' << r.scenario.n << ',' << std::fixed << std::setprecision(6)
          << p.bias << ',' << p.mse << std::defaultfloat << ',' << r.nrep_effective << '\n';
    }
  }
}

SyntheticSample make_labor_supply_sample(std::uint64_t seed) {
  constexpr Eigen::Index kRows = 753;
  constexpr Eigen::Index kCensored = 325;
  Rng rng(seed);
  SyntheticSample s;
  s.covariate_names = {"age", "educ", "exper", "kidslt6", "nwifeinc"};
  s.covariates.resize(kRows, 5);
  Eigen::VectorXd latent(kRows);
  const auto family = GeneratorFamily::log_normal();
  for (Eigen::Index i = 0; i < kRows; ++i) {
    const double age = 30.0 + std::floor(31.0 * rng.uniform());
    const double educ = 5.0 + std::floor(13.0 * rng.uniform());
    const double max_exper = std::max(0.0, age - educ - 6.0);
    const double exper = std::floor((max_exper + 1.0) * rng.uniform());
    const double u = rng.uniform();
    const double kids = u < 0.80 ? 0.0 : (u < 0.95 ? 1.0 : 2.0);
    const double nwifeinc = std::exp(2.9 + 0.6 * rng.normal());
    s.covariates.row(i) << age, educ, exper, kids, nwifeinc;

    const double log_q = 0.2 + 0.08 * educ + 0.03 * exper - 0.01 * (age - 45.0) - 0.3 * kids - 0.01 * nwifeinc;
    const double log_phi = -0.4 + 0.06 * (age - 45.0) + 0.9 * kids - 0.05 * (exper - 10.0);
    const double z = family.quantile(rng.uniform());
    latent[i] = std::exp(log_q + std::exp(0.5 * log_phi) * z);
  }
  // rescale so that exactly kCensored latent values fall at or below 1
  std::vector<double> sorted(latent.data(), latent.data() + kRows);
  std::sort(sorted.begin(), sorted.end());
  const double cut = std::sqrt(sorted[kCensored - 1] * sorted[kCensored]);

  Dataset& d = s.data;
  d.psi = 1.0;
  d.t.resize(kRows);
  d.censored.assign(kRows, 0);
  d.X.resize(kRows, 6);
  d.W.resize(kRows, 4);
  s.response.resize(kRows);
  for (Eigen::Index i = 0; i < kRows; ++i) {
    const double t = latent[i] / cut;
    const bool cens = !(t > 1.0);
    d.censored[i] = cens ? 1 : 0;
    d.t[i] = cens ? 1.0 : t;
    s.response[i] = cens ? 0.0 : t - 1.0;
    d.X(i, 0) = 1.0;
    d.X.row(i).tail(5) = s.covariates.row(i);
    d.W(i, 0) = 1.0;
    d.W(i, 1) = s.covariates(i, 0);
    d.W(i, 2) = s.covariates(i, 3);
    d.W(i, 3) = s.covariates(i, 2);
  }
  d.x_names = {"(Intercept)", "age", "educ", "exper", "kidslt6", "nwifeinc"};
  d.w_names = {"(Intercept)", "age", "kidslt6", "exper"};
  return s;
}

void write_labor_supply_csv(std::ostream& out, const SyntheticSample& sample) {
  out << "wage";
  for (const auto& name : sample.covariate_names) out << ',' << name;
  out << '\n';
  out << std::setprecision(10);
  for (Eigen::Index i = 0; i < sample.response.size(); ++i) {
    out << sample.response[i];
    for (Eigen::Index j = 0; j < sample.covariates.cols(); ++j) out << ',' << sample.covariates(i, j);
    out << '\n';
  }
}

}  // namespace lsqtobit
