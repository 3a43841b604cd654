#include "lsqtobit/io.hpp"

#include "lsqtobit/errors.hpp"
#include "special.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lsqtobit {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::Config, what + ": cannot parse '" + text + "' as a number");
  }
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" || cell == "." ||
         cell == "NULL";
}

// 6 significant digits
std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCategory::Io, "write failed for '" + path.string() + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else cell += c;
  }
  cells.push_back(trim(cell));
  return cells;
}

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "fit") return Command::Fit;
  if (name == "profile-q") return Command::ProfileQ;
  if (name == "simulate") return Command::Simulate;
  if (name == "diagnose") return Command::Diagnose;
  throw Error(ErrorCategory::Config, "unknown command '" + name + "'");
}

std::string command_name(Command command) {
  switch (command) {
    case Command::Fit: return "fit";
    case Command::ProfileQ: return "profile-q";
    case Command::Simulate: return "simulate";
    case Command::Diagnose: return "diagnose";
  }
  return "fit";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& raw) {
  std::string text = trim(raw);
  if (text.rfind("grid", 0) == 0) text = trim(text.substr(4));
  if (text.empty()) throw Error(ErrorCategory::Config, "empty grid");
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw Error(ErrorCategory::Config, "grid '" + raw + "' must read a:b:step");
    const double a = parse_number(parts[0], "grid start");
    const double b = parse_number(parts[1], "grid end");
    const double step = parse_number(parts[2], "grid step");
    if (!(step > 0.0) || b < a) throw Error(ErrorCategory::Config, "grid '" + raw + "' needs step > 0 and a <= b");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // round to 12 decimals so 0.01 * 7 reads as 0.07
      out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
  }
  for (const auto& item : split_list(text)) out.push_back(parse_number(item, "grid value"));
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "command") c.command = parse_command(value);
  else if (key == "data") c.data_path = value;
  else if (key == "response") c.response = value;
  else if (key == "censor-col" || key == "censor_col") c.censor_col = value;
  else if (key == "psi") c.psi = parse_number(value, "psi");
  else if (key == "shift") c.shift = parse_number(value, "shift");
  else if (key == "qcov") c.quantile_covariates = split_list(value);
  else if (key == "dcov") c.dispersion_covariates = split_list(value);
  else if (key == "family") c.family = value;
  else if (key == "xi") c.xi = value;
  else if (key == "q") c.q = value;
  else if (key == "out") c.output_dir = value;
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_number(value, "seed"));
  else if (key == "nrep") c.nrep = static_cast<int>(parse_number(value, "nrep"));
  else if (key == "nsim-envelope" || key == "nsim_envelope") c.nsim_envelope = static_cast<int>(parse_number(value, "nsim-envelope"));
  else if (key == "fit") c.fit_path = value;
  else if (key == "scenario") c.scenario_path = value;
  else if (key == "n") c.sample_sizes = parse_grid(value);
  else if (key == "censoring") c.censoring = parse_grid(value);
  else throw Error(ErrorCategory::Config, "unknown config key '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open config '" + path.string() + "'");
  std::map<std::string, std::string> out;
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
      throw Error(ErrorCategory::Config,
                  path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

Dataset ingest_csv(const fs::path& path, const RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open data file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCategory::Parse, path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = unquote(h);

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCategory::Config, "column '" + name + "' not found in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  if (config.response.empty()) throw Error(ErrorCategory::Config, "no response column given");
  const std::size_t resp_col = column(config.response);
  std::optional<std::size_t> cens_col;
  if (!config.censor_col.empty()) cens_col = column(config.censor_col);
  std::vector<std::size_t> qcols, dcols;
  for (const auto& name : config.quantile_covariates) qcols.push_back(column(name));
  for (const auto& name : config.dispersion_covariates) dcols.push_back(column(name));
  if (!cens_col && !config.psi) {
    throw Error(ErrorCategory::Config, "either a censoring column or a threshold psi is required");
  }

  std::vector<double> response;
  std::vector<std::uint8_t> flags;
  std::vector<std::vector<double>> xrows, wrows;
  std::vector<int> line_numbers;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ": line " << line_no << ": expected " << header.size() << " fields, found "
         << cells.size();
      throw Error(ErrorCategory::Parse, os.str());
    }
    auto value = [&](std::size_t col) {
      const std::string cell = unquote(cells[col]);
      if (is_missing(cell)) {
        throw Error(ErrorCategory::Parse, path.string() + ": line " + std::to_string(line_no) +
                                              ", column '" + header[col] + "': missing value");
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorCategory::Parse, path.string() + ": line " + std::to_string(line_no) + ", column '" +
                                              header[col] + "': cannot parse '" + cell + "'");
      }
    };
    response.push_back(value(resp_col) + config.shift);
    flags.push_back(cens_col ? (value(*cens_col) != 0.0 ? 1 : 0) : 0);
    std::vector<double> xr, wr;
    for (auto c : qcols) xr.push_back(value(c));
    for (auto c : dcols) wr.push_back(value(c));
    xrows.push_back(std::move(xr));
    wrows.push_back(std::move(wr));
    line_numbers.push_back(line_no);
  }
  const auto n = static_cast<Eigen::Index>(response.size());
  if (n == 0) throw Error(ErrorCategory::Data, path.string() + ": dataset has no rows");

  double psi = 0.0;
  if (config.psi) {
    psi = *config.psi;
  } else {
    const auto it = std::find(flags.begin(), flags.end(), 1);
    if (it == flags.end()) {
      throw Error(ErrorCategory::Config, "no censored rows; give psi explicitly");
    }
    psi = response[static_cast<std::size_t>(it - flags.begin())];
  }
  if (!(psi > 0.0)) throw Error(ErrorCategory::Config, "psi must be positive (consider --shift)");

  Dataset d;
  d.psi = psi;
  d.t.resize(n);
  d.censored.assign(n, 0);
  d.X.resize(n, static_cast<Eigen::Index>(qcols.size()) + 1);
  d.W.resize(n, static_cast<Eigen::Index>(dcols.size()) + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = response[i];
    bool cens = false;
    if (cens_col) {
      cens = flags[i] != 0;
      if (cens && std::fabs(y - psi) > 1e-9 * std::max(1.0, psi)) {
        throw Error(ErrorCategory::Data, path.string() + ": line " + std::to_string(line_numbers[i]) +
                                             ": censored response differs from psi=" + fmt(psi));
      }
      if (!cens && !(y > psi)) {
        throw Error(ErrorCategory::Data, path.string() + ": line " + std::to_string(line_numbers[i]) +
                                             ": uncensored response must exceed psi=" + fmt(psi));
      }
    } else {
      cens = !(y > psi);
    }
    d.censored[i] = cens ? 1 : 0;
    d.t[i] = cens ? psi : y;
    d.X(i, 0) = 1.0;
    for (std::size_t j = 0; j < qcols.size(); ++j) d.X(i, static_cast<Eigen::Index>(j) + 1) = xrows[i][j];
    d.W(i, 0) = 1.0;
    for (std::size_t j = 0; j < dcols.size(); ++j) d.W(i, static_cast<Eigen::Index>(j) + 1) = wrows[i][j];
  }
  if (d.censored_count() == n) throw Error(ErrorCategory::Data, path.string() + ": every observation is censored");
  d.x_names.push_back("(Intercept)");
  for (const auto& s : config.quantile_covariates) d.x_names.push_back(s);
  d.w_names.push_back("(Intercept)");
  for (const auto& s : config.dispersion_covariates) d.w_names.push_back(s);
  d.validate();
  return d;
}

std::string significance_stars(double p_value) {
  if (!(p_value == p_value)) return "";
  if (p_value < 0.05) return "*";
  if (p_value < 0.10) return "**";
  return "";
}

std::vector<EstimateRow> estimate_rows(const FitResult& fit) {
  std::vector<EstimateRow> rows;
  const Eigen::VectorXd theta = fit.theta_hat.flat();
  const auto nb = fit.theta_hat.beta.size();
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    EstimateRow r;
    const bool is_beta = j < nb;
    const Eigen::Index local = is_beta ? j : j - nb;
    const auto& names = is_beta ? fit.beta_names : fit.kappa_names;
    const std::string label = local < static_cast<Eigen::Index>(names.size()) ? names[local] : std::to_string(local);
    r.parameter = std::string(is_beta ? "beta" : "kappa") + "[" + label + "]";
    r.estimate = theta[j];
    r.se = fit.se.size() == theta.size() ? fit.se[j] : std::numeric_limits<double>::quiet_NaN();
    r.z = r.estimate / r.se;
    r.p_value = std::isfinite(r.z) ? normal_two_sided_p(r.z) : std::numeric_limits<double>::quiet_NaN();
    r.significance = significance_stars(r.p_value);
    rows.push_back(r);
  }
  return rows;
}

void write_estimates_csv(const fs::path& path, const FitResult& fit) {
  auto out = open_output(path);
  out << "parameter,estimate,se,z,p_value,percent_effect,significance\n";
  const auto nb = fit.theta_hat.beta.size();
  const auto rows = estimate_rows(fit);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& r = rows[j];
    out << r.parameter << ',' << fmt(r.estimate) << ',' << fmt(r.se) << ',' << fmt(r.z) << ',' << fmt(r.p_value)
        << ',';
    // effects are reported for slopes of the quantile submodel only
    if (static_cast<Eigen::Index>(j) < nb && j > 0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", percent_effect(r.estimate));
      out << buf;
    }
    out << ',' << r.significance << '\n';
  }
  finish(out, path);
}

std::vector<EstimateRow> read_estimates_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<EstimateRow> rows;
  auto num = [](const std::string& s) {
    return s == "NA" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 7) throw Error(ErrorCategory::Parse, path.string() + ": malformed estimates row");
    rows.push_back({cells[0], num(cells[1]), num(cells[2]), num(cells[3]), num(cells[4]), cells[6]});
  }
  return rows;
}

void write_fit_json(const fs::path& path, const FitResult& fit) {
  nlohmann::ordered_json j;
  j["family"] = std::string(fit.family.name());
  j["xi_hat"] = fit.xi_hat;
  j["q"] = fit.q;
  j["psi"] = fit.psi;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_params"] = fit.n_params;
  j["parameter_count_convention"] = "beta and kappa only; xi is profiled and not counted";
  j["n_obs"] = fit.n_obs;
  j["n_censored"] = fit.n_censored;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["score_max_norm"] = fit.score_max_norm;
  j["se_available"] = fit.se_available;
  j["beta_names"] = fit.beta_names;
  j["kappa_names"] = fit.kappa_names;
  j["beta"] = std::vector<double>(fit.theta_hat.beta.data(), fit.theta_hat.beta.data() + fit.theta_hat.beta.size());
  j["kappa"] =
      std::vector<double>(fit.theta_hat.kappa.data(), fit.theta_hat.kappa.data() + fit.theta_hat.kappa.size());
  auto se = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < fit.se.size(); ++i) {
    if (std::isfinite(fit.se[i])) se.push_back(fit.se[i]);
    else se.push_back(nullptr);
  }
  j["se"] = se;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& p : fit.profile_trace) {
    nlohmann::ordered_json e;
    e["xi"] = p.xi;
    if (std::isfinite(p.loglik)) e["loglik"] = p.loglik;
    else e["loglik"] = nullptr;
    e["converged"] = p.converged;
    trace.push_back(e);
  }
  j["profile_trace"] = trace;
  j["warnings"] = fit.warnings;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

FitResult read_fit_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open fit file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    FitResult fit;
    const FamilyKind kind = parse_family_kind(j.at("family").get<std::string>());
    fit.xi_hat = j.at("xi_hat").get<double>();
    fit.family = GeneratorFamily(kind, fit.xi_hat);
    fit.q = j.at("q").get<double>();
    fit.psi = j.at("psi").get<double>();
    fit.loglik = j.at("loglik").get<double>();
    fit.aic = j.at("aic").get<double>();
    fit.bic = j.at("bic").get<double>();
    fit.n_params = j.at("n_params").get<int>();
    fit.n_obs = j.at("n_obs").get<Eigen::Index>();
    fit.n_censored = j.at("n_censored").get<Eigen::Index>();
    fit.converged = j.at("converged").get<bool>();
    fit.beta_names = j.at("beta_names").get<std::vector<std::string>>();
    fit.kappa_names = j.at("kappa_names").get<std::vector<std::string>>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    const auto kappa = j.at("kappa").get<std::vector<double>>();
    fit.theta_hat.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    fit.theta_hat.kappa = Eigen::Map<const Eigen::VectorXd>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
    const auto& se = j.at("se");
    fit.se.resize(static_cast<Eigen::Index>(se.size()));
    for (std::size_t i = 0; i < se.size(); ++i)
      fit.se[static_cast<Eigen::Index>(i)] = se[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : se[i].get<double>();
    fit.se_available = j.at("se_available").get<bool>();
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Parse, path.string() + ": " + e.what());
  }
}

void write_envelope_csv(const fs::path& path, const ResidualReport& report) {
  auto out = open_output(path);
  out << "rank,theoretical,observed,lower,median,upper\n";
  for (std::size_t i = 0; i < report.envelope.size(); ++i) {
    const auto& p = report.envelope[i];
    out << i + 1 << ',' << fmt(p.theoretical) << ',' << fmt(p.observed) << ',' << fmt(p.lower) << ','
        << fmt(p.median) << ',' << fmt(p.upper) << '\n';
  }
  finish(out, path);
}

void write_residuals_csv(const fs::path& path, const ResidualReport& report, const Dataset& data) {
  auto out = open_output(path);
  out << "row,t,censored,r_m,r_mt,clamped\n";
  for (Eigen::Index i = 0; i < report.r_mt.size(); ++i) {
    out << i + 1 << ',' << fmt(data.t[i]) << ',' << int(data.censored[i]) << ',' << fmt(report.r_m[i]) << ','
        << fmt(report.r_mt[i]) << ',' << int(report.clamped[i]) << '\n';
  }
  finish(out, path);
}

void write_histogram_csv(const fs::path& path, const Dataset& data) {
  const Eigen::Index n = data.size();
  const double lo = data.t.minCoeff(), hi = data.t.maxCoeff();
  const auto bins = static_cast<Eigen::Index>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto b = static_cast<Eigen::Index>((data.t[i] - lo) / width);
    b = std::clamp<Eigen::Index>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  auto out = open_output(path);
  out << "bin_lower,bin_upper,count\n";
  for (Eigen::Index b = 0; b < bins; ++b) {
    out << fmt(lo + static_cast<double>(b) * width) << ',' << fmt(lo + static_cast<double>(b + 1) * width) << ','
        << counts[static_cast<std::size_t>(b)] << '\n';
  }
  finish(out, path);
}

void write_q_profile_csv(const fs::path& path, const QSelection& selection) {
  auto out = open_output(path);
  out << "q,loglik,aic,bic,xi_hat,converged,selected\n";
  for (const auto& e : selection.trace) {
    out << fmt(e.q) << ',' << fmt(e.loglik) << ',' << fmt(e.aic) << ',' << fmt(e.bic) << ',' << fmt(e.xi_hat) << ','
        << (e.converged ? 1 : 0) << ',' << (e.q == selection.q_otm ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void emit_report(const FitResult& fit, const ResidualReport& residuals, const Dataset& data, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  write_estimates_csv(dir / "estimates.csv", fit);
  write_fit_json(dir / "fit.json", fit);
  write_residuals_csv(dir / "residuals.csv", residuals, data);
  if (!residuals.envelope.empty()) write_envelope_csv(dir / "qq_envelope.csv", residuals);
  write_histogram_csv(dir / "histogram.csv", data);
}

}  // namespace lsqtobit
