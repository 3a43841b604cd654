#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = LSQTOBIT_CLI_PATH;
const std::string kData = std::string(LSQTOBIT_DATA_DIR) + "/labor_supply_synthetic.csv";
const std::string kModel2 =
    " --data " + kData +
    " --response wage --shift 1 --psi 1 --qcov age,educ,exper,kidslt6,nwifeinc --dcov age,kidslt6,exper";

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("lsqtobit-cli-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fit writes every report file and exits 0") {
  const fs::path out = scratch("fit");
  CHECK(run("fit" + kModel2 + " --out " + out.string()) == 0);
  for (const char* name : {"estimates.csv", "fit.json", "residuals.csv", "qq_envelope.csv", "histogram.csv"})
    CHECK(fs::exists(out / name));
  fs::remove_all(out);
}

TEST_CASE("fit then diagnose matches the single invocation") {
  const fs::path dir = scratch("compose");
  REQUIRE(run("fit" + kModel2 + " --seed 7 --out " + (dir / "fit").string()) == 0);
  REQUIRE(run("diagnose" + kModel2 + " --seed 7 --fit " + (dir / "fit" / "fit.json").string() + " --out " +
              (dir / "diag").string()) == 0);
  for (const char* name : {"residuals.csv", "qq_envelope.csv", "histogram.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir / "fit" / name) == slurp(dir / "diag" / name));
  }
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical") {
  const fs::path dir = scratch("repeat");
  for (const char* tag : {"a", "b"})
    REQUIRE(run("fit" + kModel2 + " --family logt --xi 2,4,8 --out " + (dir / tag).string()) == 0);
  for (const char* name : {"estimates.csv", "fit.json", "residuals.csv", "qq_envelope.csv", "histogram.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  fs::remove_all(dir);
}

TEST_CASE("config file with flag overrides") {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "data = " << kData
                                 << "\nresponse = wage\nshift = 1\npsi = 1\nqcov = educ\nfamily = weibull\n";
  // the file alone names an unknown family
  CHECK(run("fit --config " + (dir / "run.cfg").string() + " --out " + (dir / "x").string()) == 2);
  CHECK(run("fit --config " + (dir / "run.cfg").string() + " --family lognormal --out " + (dir / "y").string()) == 0);
  CHECK(slurp(dir / "y" / "estimates.csv").find("beta[educ]") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("profile-q writes the q trace") {
  const fs::path dir = scratch("profileq");
  CHECK(run("profile-q" + kModel2 + " --q 0.25:0.75:0.25 --nsim-envelope 0 --out " + dir.string()) == 0);
  const std::string trace = slurp(dir / "q_profile.csv");
  CHECK(trace.rfind("q,loglik,aic,bic,xi_hat,converged,selected\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 4);
  fs::remove_all(dir);
}

TEST_CASE("simulate writes a bias/MSE table") {
  const fs::path dir = scratch("simulate");
  CHECK(run("simulate --family lognormal --q 0.5 --n 100 --censoring 0.1 --nrep 10 --out " + dir.string()) == 0);
  const std::string table = slurp(dir / "mc_table.csv");
  CHECK(table.rfind("family,censoring,q,parameter,n,bias,mse,nrep_effective\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  fs::remove_all(dir);
}

TEST_CASE("error categories map to exit codes") {
  const fs::path dir = scratch("errors");
  CHECK(run("fit --data " + (dir / "missing.csv").string() + " --response y --psi 1") == 8);
  CHECK(run("fit" + kModel2 + " --family weibull") == 2);
  CHECK(run("plot") == 2);
  CHECK(run("fit --response wage") == 2);
  std::ofstream(dir / "na.csv") << "y,x\n2,1\nNA,2\n";
  CHECK(run("fit --data " + (dir / "na.csv").string() + " --response y --psi 1 --qcov x") == 3);
  std::ofstream(dir / "censored.csv") << "y\n0\n0\n0\n";
  CHECK(run("fit --data " + (dir / "censored.csv").string() + " --response y --shift 1 --psi 1") == 4);
  std::ofstream(dir / "collinear.csv") << "y,a,b\n2,1,2\n3,2,4\n4,3,6\n5,4,8\n6,5,10\n7,1,2\n";
  CHECK(run("fit --data " + (dir / "collinear.csv").string() + " --response y --psi 1 --qcov a,b") == 5);
  fs::remove_all(dir);
}
