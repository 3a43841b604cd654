#include "lsqtobit/errors.hpp"
#include "lsqtobit/io.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace lsqtobit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("lsqtobit-test-" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path / name) << content;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig base_config() {
  RunConfig c;
  c.response = "y";
  c.psi = 1.0;
  return c;
}

FitResult small_fit(Dataset& d) {
  const auto ln = GeneratorFamily::log_normal();
  d = fixture::sample(ln, 0.5, 150, 0.1, 19);
  return fit({ln, 0.5, d.psi}, d);
}

}  // namespace

TEST_CASE("ingest: small file with one covariate") {
  TempDir dir("ingest");
  const auto file = dir.write("d.csv", "y,x\n1.0,0.5\n2.5,1.5\n4.0,-1\n");
  RunConfig c = base_config();
  c.quantile_covariates = {"x"};
  const Dataset d = ingest_csv(file, c);
  CHECK(d.size() == 3);
  CHECK(d.X.rows() == 3);
  CHECK(d.X.cols() == 2);
  CHECK(d.X.col(0).isOnes());
  CHECK(d.X(2, 1) == -1.0);
  CHECK(d.W.cols() == 1);
  CHECK(d.censored[0] == 1);
  CHECK(d.t[1] == 2.5);
  CHECK(d.x_names == std::vector<std::string>{"(Intercept)", "x"});
}

TEST_CASE("ingest: missing values name the line") {
  TempDir dir("missing");
  const auto file = dir.write("d.csv", "y,x\n2.0,1\nNA,2\n3.0,3\n");
  try {
    ingest_csv(file, base_config());
    FAIL("missing value accepted");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const auto ragged = dir.write("r.csv", "y,x\n2.0,1\n3.0\n");
  CHECK_THROWS_AS(ingest_csv(ragged, base_config()), Error);
  const auto text = dir.write("t.csv", "y\nabc\n");
  CHECK_THROWS_AS(ingest_csv(text, base_config()), Error);
}

TEST_CASE("ingest: shift and threshold rule") {
  TempDir dir("shift");
  const auto file = dir.write("d.csv", "y\n0\n0\n2.5\n");
  RunConfig c = base_config();
  c.shift = 1.0;
  c.psi = 1.0;
  const Dataset d = ingest_csv(file, c);
  CHECK(d.censored == std::vector<std::uint8_t>{1, 1, 0});
  CHECK(d.t[2] == 3.5);
  CHECK(d.t[0] == 1.0);
}

TEST_CASE("ingest: censoring column and error cases") {
  TempDir dir("cens");
  const auto file = dir.write("d.csv", "y,c\n1,1\n2,0\n3,0\n");
  RunConfig c;
  c.response = "y";
  c.censor_col = "c";
  const Dataset d = ingest_csv(file, c);
  CHECK(d.psi == 1.0);
  CHECK(d.censored == std::vector<std::uint8_t>{1, 0, 0});

  const auto all = dir.write("a.csv", "y\n0\n0\n");
  RunConfig shifted = base_config();
  shifted.shift = 1.0;
  try {
    ingest_csv(all, shifted);
    FAIL("all-censored data accepted");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Data);
  }
  const auto empty = dir.write("e.csv", "y\n");
  CHECK_THROWS_AS(ingest_csv(empty, base_config()), Error);
  RunConfig unknown = base_config();
  unknown.quantile_covariates = {"nope"};
  CHECK_THROWS_AS(ingest_csv(file, unknown), Error);
  CHECK_THROWS_AS(ingest_csv(dir.path / "absent.csv", base_config()), Error);
}

TEST_CASE("grids and settings") {
  const auto g = parse_grid("0.05:0.95:0.05");
  CHECK(g.size() == 19);
  CHECK(g[6] == 0.35);
  CHECK(g.back() == 0.95);
  CHECK(parse_grid("grid 0.1:0.3:0.1") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(parse_grid("0.1, 0.5,0.9") == std::vector<double>{0.1, 0.5, 0.9});
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), Error);
  CHECK_THROWS_AS(parse_grid("a:b"), Error);

  RunConfig c;
  apply_setting(c, "qcov", "age, educ");
  apply_setting(c, "psi", "1");
  apply_setting(c, "nsim-envelope", "19");
  apply_setting(c, "command", "profile-q");
  CHECK(c.quantile_covariates == std::vector<std::string>{"age", "educ"});
  CHECK(*c.psi == 1.0);
  CHECK(c.nsim_envelope == 19);
  CHECK(c.command == Command::ProfileQ);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), Error);
  CHECK_THROWS_AS(apply_setting(c, "psi", "one"), Error);
  CHECK_THROWS_AS(parse_command("plot"), Error);
  CHECK(command_name(parse_command("diagnose")) == "diagnose");

  TempDir dir("config");
  const auto cfg = dir.write("run.cfg", "# labor supply\nfamily = logt\nxi=profile\n\nq = 0.1:0.9:0.1\n");
  const auto entries = read_config_file(cfg);
  CHECK(entries.at("family") == "logt");
  CHECK(entries.at("xi") == "profile");
  CHECK(entries.at("q") == "0.1:0.9:0.1");
  const auto broken = dir.write("bad.cfg", "family logt\n");
  CHECK_THROWS_AS(read_config_file(broken), Error);
}

TEST_CASE("significance stars follow the 5% / 10% footnote") {
  CHECK(significance_stars(0.01) == "*");
  CHECK(significance_stars(0.07) == "**");
  CHECK(significance_stars(0.2) == "");
}

TEST_CASE("estimates round trip within six significant digits") {
  Dataset d;
  const FitResult fr = small_fit(d);
  TempDir dir("estimates");
  write_estimates_csv(dir.path / "estimates.csv", fr);
  const auto rows = read_estimates_csv(dir.path / "estimates.csv");
  const auto expected = estimate_rows(fr);
  REQUIRE(rows.size() == expected.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    CHECK(rows[j].parameter == expected[j].parameter);
    CHECK(rows[j].estimate == doctest::Approx(expected[j].estimate).epsilon(5e-6));
    CHECK(rows[j].se == doctest::Approx(expected[j].se).epsilon(5e-6));
    CHECK(rows[j].significance == expected[j].significance);
  }
  CHECK(rows[0].parameter == "beta[(Intercept)]");
}

TEST_CASE("percent effect column") {
  FitResult fr;
  fr.theta_hat = {Eigen::Vector2d(0.5, 0.0974), Eigen::VectorXd::Constant(1, 0.1)};
  fr.se = Eigen::Vector3d(0.1, 0.02, 0.05);
  fr.beta_names = {"(Intercept)", "educ"};
  fr.kappa_names = {"(Intercept)"};
  TempDir dir("percent");
  write_estimates_csv(dir.path / "e.csv", fr);
  const std::string text = slurp(dir.path / "e.csv");
  CHECK(text.find("beta[educ],0.0974,0.02,4.87,1.11") != std::string::npos);
  CHECK(text.find(",10.23,*\n") != std::string::npos);
  // no effect is reported for intercepts or dispersion terms
  CHECK(text.find("beta[(Intercept)],0.5,0.1,5,5.73303e-07,,*\n") != std::string::npos);
}

TEST_CASE("fit.json round trip") {
  Dataset d;
  const FitResult fr = small_fit(d);
  TempDir dir("json");
  write_fit_json(dir.path / "fit.json", fr);
  const FitResult back = read_fit_json(dir.path / "fit.json");
  CHECK(back.theta_hat.flat() == fr.theta_hat.flat());
  CHECK(back.se == fr.se);
  CHECK(back.family.kind() == fr.family.kind());
  CHECK(back.q == fr.q);
  CHECK(back.psi == fr.psi);
  CHECK(back.loglik == fr.loglik);
  CHECK(back.n_params == 4);
  CHECK(slurp(dir.path / "fit.json").find("xi is profiled and not counted") != std::string::npos);
  dir.write("broken.json", "{\"family\": 3}");
  CHECK_THROWS_AS(read_fit_json(dir.path / "broken.json"), Error);
}

TEST_CASE("reports are byte-identical across runs") {
  TempDir dir("report");
  for (const char* run : {"a", "b"}) {
    Dataset d;
    const FitResult fr = small_fit(d);
    EnvelopeOptions opt;
    opt.seed = 4;
    const ResidualReport rep = simulated_envelope(d, fr, opt);
    emit_report(fr, rep, d, dir.path / run);
  }
  for (const char* name : {"estimates.csv", "fit.json", "residuals.csv", "qq_envelope.csv", "histogram.csv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir.path / "a" / name));
    CHECK(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
  }
}

TEST_CASE("histogram uses Sturges bins covering every observation") {
  Dataset d;
  small_fit(d);
  TempDir dir("hist");
  write_histogram_csv(dir.path / "h.csv", d);
  std::ifstream in(dir.path / "h.csv");
  std::string line;
  std::getline(in, line);
  long total = 0;
  int bins = 0;
  while (std::getline(in, line)) {
    total += std::stol(line.substr(line.rfind(',') + 1));
    ++bins;
  }
  CHECK(total == 150);
  CHECK(bins == 1 + static_cast<int>(std::ceil(std::log2(150.0))));
}
