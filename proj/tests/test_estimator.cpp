#include "lsqtobit/estimator.hpp"
#include "lsqtobit/optimizer.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

using namespace lsqtobit;

namespace {

Dataset intercept_only_dispersion(Dataset d) {
  d.W = Eigen::MatrixXd::Ones(d.size(), 1);
  d.w_names = {"(Intercept)"};
  return d;
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

int iterations_from(const TobitLikelihood& lik, const Eigen::VectorXd& x0) {
  const double n = static_cast<double>(lik.n_obs());
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const double v = lik.value_and_gradient(x, grad);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    grad /= -n;
    return -v / n;
  };
  const BfgsResult r = minimize_bfgs(objective, x0, {});
  return r.converged ? r.iterations : std::numeric_limits<int>::max();
}

}  // namespace

TEST_CASE("uncensored log-normal median fit is ordinary least squares") {
  const auto ln = GeneratorFamily::log_normal();
  const Dataset d = intercept_only_dispersion(fixture::sample(ln, 0.5, 200, 0.0, 17));
  const FitResult r = fit({ln, 0.5, d.psi}, d);
  const Eigen::VectorXd y = d.t.array().log();
  const Eigen::VectorXd ols = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * y);
  CHECK((r.theta_hat.beta - ols).cwiseAbs().maxCoeff() < 1e-6);
  // the dispersion MLE is the mean squared residual
  const double sigma2 = (y - d.X * ols).squaredNorm() / static_cast<double>(d.size());
  CHECK(r.theta_hat.kappa[0] == doctest::Approx(std::log(sigma2)).epsilon(1e-6));
}

TEST_CASE("fit reaches a stationary interior maximum") {
  for (const auto& f : {GeneratorFamily::log_normal(), GeneratorFamily::log_student_t(4.0),
                        GeneratorFamily::log_power_exponential(0.3), GeneratorFamily::extended_birnbaum_saunders(0.5)}) {
    CAPTURE(f.label());
    const Dataset d = fixture::sample(f, 0.9, 300, 0.4, 21);
    const ModelSpec spec{f, 0.9, d.psi};
    const FitResult r = fit(spec, d);
    CHECK(r.converged);
    CHECK(r.score_max_norm < 1e-5);
    CHECK(r.score_max_norm / static_cast<double>(r.n_obs) <= 1e-6);
    const Eigen::MatrixXd info = -hessian(spec, d, r.theta_hat);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info).eigenvalues();
    CHECK(eig.minCoeff() > 0.0);
    CHECK(r.se_available);
    CHECK((r.se.array() > 0.0).all());
    CHECK(r.warnings.empty());
  }
}

TEST_CASE("information criteria count beta and kappa only") {
  const auto ln = GeneratorFamily::log_normal();
  const Dataset d = fixture::sample(ln, 0.5, 150, 0.1, 2);
  const FitResult r = fit({ln, 0.5, d.psi}, d);
  CHECK(r.n_params == 4);
  CHECK(r.aic == -2.0 * r.loglik + 2.0 * 4);
  CHECK(r.bic == -2.0 * r.loglik + 4 * std::log(150.0));
  CHECK(r.aic == information_aic(r.loglik, 4));
  CHECK(r.bic == information_bic(r.loglik, 4, 150));
}

TEST_CASE("profile: single-point grid equals the fixed fit; maximum dominates the trace") {
  const auto t4 = GeneratorFamily::log_student_t(4.0);
  const Dataset d = fixture::sample(t4, 0.5, 300, 0.1, 31);
  const ModelSpec spec{t4, 0.5, d.psi};
  const FitResult fixed = fit(spec, d);
  FitConfig single;
  single.xi_grid = {4.0};
  const FitResult profiled = fit(spec, d, single);
  CHECK(profiled.theta_hat.flat() == fixed.theta_hat.flat());
  CHECK(profiled.loglik == fixed.loglik);
  CHECK(profiled.xi_hat == 4.0);

  FitConfig grid;
  grid.xi_grid = {1.0, 2.0, 4.0, 8.0, 16.0};
  const FitResult best = fit(spec, d, grid);
  REQUIRE(best.profile_trace.size() == 5);
  for (const auto& pt : best.profile_trace) {
    CHECK(pt.converged);
    CHECK(best.loglik >= pt.loglik);
  }
  CHECK(best.family.xi() == best.xi_hat);
}

TEST_CASE("duplicating every row shrinks standard errors by sqrt 2") {
  const auto ln = GeneratorFamily::log_normal();
  const Dataset d = fixture::sample(ln, 0.5, 200, 0.1, 41);
  Dataset twice = d;
  const Eigen::Index n = d.size();
  twice.t.resize(2 * n);
  twice.t << d.t, d.t;
  twice.X.resize(2 * n, d.X.cols());
  twice.X << d.X, d.X;
  twice.W.resize(2 * n, d.W.cols());
  twice.W << d.W, d.W;
  twice.censored.insert(twice.censored.end(), d.censored.begin(), d.censored.end());
  const FitResult a = fit({ln, 0.5, d.psi}, d);
  const FitResult b = fit({ln, 0.5, d.psi}, twice);
  for (Eigen::Index j = 0; j < a.se.size(); ++j) {
    CHECK(a.se[j] / b.se[j] == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  }
}

TEST_CASE("initial values") {
  const auto ln = GeneratorFamily::log_normal();
  SUBCASE("noiseless log-linear data is interpolated") {
    Dataset d = fixture::sample(ln, 0.5, 30, 0.0, 3);
    d.t = (d.X * Eigen::Vector2d(0.7, -0.3)).array().exp();
    const ParamVector p = initial_theta({ln, 0.5, d.psi}, d);
    CHECK(std::fabs(p.beta[0] - 0.7) < 1e-10);
    CHECK(std::fabs(p.beta[1] + 0.3) < 1e-10);
    CHECK(p.kappa[0] == doctest::Approx(std::log(1e-6)));
  }
  SUBCASE("constant responses floor the dispersion") {
    Dataset d;
    d.t = Eigen::VectorXd::Constant(5, 2.0);
    d.censored.assign(5, 0);
    d.X = Eigen::MatrixXd::Ones(5, 1);
    d.W = Eigen::MatrixXd::Ones(5, 1);
    d.psi = 1.0;
    const ParamVector p = initial_theta({ln, 0.5, 1.0}, d);
    CHECK(p.kappa[0] == doctest::Approx(std::log(1e-6)).epsilon(1e-12));
    CHECK(p.beta[0] == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("quantile offset moves the intercept") {
    const Dataset d = fixture::sample(ln, 0.5, 100, 0.0, 4);
    const ParamVector mid = initial_theta({ln, 0.5, d.psi}, d);
    const ParamVector high = initial_theta({ln, 0.9, d.psi}, d);
    CHECK(high.beta[0] - mid.beta[0] == doctest::Approx(std::exp(0.5 * mid.kappa[0]) * ln.quantile(0.9)));
  }
  SUBCASE("rank-deficient uncensored rows fall back to zeros") {
    Dataset d = fixture::sample(ln, 0.5, 20, 0.0, 5);
    d.X.col(1).setConstant(1.0);
    const ParamVector p = initial_theta({ln, 0.5, d.psi}, d);
    CHECK(p.beta.isZero());
    CHECK(p.kappa.isZero());
  }
}

TEST_CASE("least-squares start beats a zero start") {
  int better = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = trial % 2 == 0 ? GeneratorFamily::log_normal() : GeneratorFamily::log_student_t(4.0);
    const Dataset d = fixture::sample(f, 0.5, 200, 0.1, 1000 + trial);
    const ModelSpec spec{f, 0.5, d.psi};
    const TobitLikelihood lik(spec, d);
    const int from_ls = iterations_from(lik, initial_theta(spec, d).flat());
    const int from_zero = iterations_from(lik, Eigen::VectorXd::Zero(4));
    if (from_ls < from_zero) ++better;
  }
  CHECK(better >= 80);
}

TEST_CASE("percent effect") {
  CHECK(two_decimals(percent_effect(0.0974)) == "10.23");
  CHECK(two_decimals(percent_effect(0.0383)) == "3.90");
  CHECK(percent_effect(0.0) == 0.0);
  CHECK(percent_effect(0.0974) == doctest::Approx(10.2301205931).epsilon(1e-10));
  CHECK(percent_effect(0.0383) == doctest::Approx(3.9042898996).epsilon(1e-10));
}

TEST_CASE("q selection") {
  const auto ln = GeneratorFamily::log_normal();
  const Dataset d = intercept_only_dispersion(fixture::sample(ln, 0.5, 300, 0.2, 51));
  const ModelSpec tmpl{ln, 0.5, d.psi};
  SUBCASE("constant AIC across q resolves to the smallest q") {
    const QSelection s = select_q(tmpl, d, {}, {0.9, 0.5, 0.1, 0.3});
    CHECK(s.q_otm == 0.1);
    REQUIRE(s.trace.size() == 4);
    for (const auto& e : s.trace) CHECK(std::fabs(e.aic - s.trace.front().aic) < 1e-6);
  }
  SUBCASE("single-element grid") {
    const QSelection s = select_q(tmpl, d, {}, {0.7});
    CHECK(s.q_otm == 0.7);
    CHECK(s.best.q == 0.7);
  }
  SUBCASE("heteroscedastic data: reproducible choice") {
    const Dataset h = fixture::sample(ln, 0.5, 300, 0.2, 52);
    const std::vector<double> grid{0.1, 0.3, 0.5, 0.7, 0.9};
    const QSelection a = select_q({ln, 0.5, h.psi}, h, {}, grid);
    const QSelection b = select_q({ln, 0.5, h.psi}, h, {}, grid);
    CHECK(a.q_otm == b.q_otm);
    CHECK(a.best.theta_hat.flat() == b.best.theta_hat.flat());
  }
  SUBCASE("invalid grids") {
    CHECK_THROWS_AS(select_q(tmpl, d, {}, {}), Error);
    CHECK_THROWS_AS(select_q(tmpl, d, {}, {0.0, 0.5}), Error);
  }
}

TEST_CASE("reparameterization across q with constant dispersion") {
  const auto ln = GeneratorFamily::log_normal();
  const Dataset d = intercept_only_dispersion(fixture::sample(ln, 0.5, 400, 0.1, 61));
  const FitResult base = fit({ln, 0.5, d.psi}, d);
  for (double q : {0.05, 0.95}) {
    const FitResult r = fit({ln, q, d.psi}, d);
    CHECK(std::fabs(r.loglik - base.loglik) < 1e-6);
    const double sqrt_phi = std::exp(0.5 * base.theta_hat.kappa[0]);
    CHECK(std::fabs((r.theta_hat.beta[0] - base.theta_hat.beta[0]) - sqrt_phi * ln.quantile(q)) < 1e-5);
    CHECK(std::fabs(r.theta_hat.beta[1] - base.theta_hat.beta[1]) < 1e-6);
  }
}

TEST_CASE("fit errors") {
  const auto ln = GeneratorFamily::log_normal();
  SUBCASE("collinear columns are named") {
    Dataset d = fixture::sample(ln, 0.5, 50, 0.1, 71);
    Eigen::MatrixXd X(d.size(), 3);
    X << d.X, 2.0 * d.X.col(1);
    d.X = X;
    d.x_names = {"(Intercept)", "x", "x_twice"};
    try {
      fit({ln, 0.5, d.psi}, d);
      FAIL("rank deficiency accepted");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::RankDeficient);
      const std::string msg = e.what();
      CHECK((msg.find("x_twice") != std::string::npos || msg.find(" x") != std::string::npos));
    }
  }
  SUBCASE("too few uncensored observations") {
    Dataset d;
    d.t = Eigen::Vector3d(1.0, 1.0, 2.0);
    d.censored = {1, 1, 0};
    d.X = Eigen::MatrixXd::Ones(3, 1);
    d.W = Eigen::MatrixXd::Ones(3, 1);
    d.psi = 1.0;
    try {
      fit({ln, 0.5, 1.0}, d);
      FAIL("underdetermined fit accepted");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::Data);
    }
  }
  SUBCASE("iteration cap carries the partial result") {
    const Dataset d = fixture::sample(ln, 0.5, 100, 0.1, 72);
    FitConfig cfg;
    cfg.max_iter = 1;
    cfg.restarts = 0;
    cfg.newton_steps = 0;
    try {
      fit({ln, 0.5, d.psi}, d, cfg);
      FAIL("expected non-convergence");
    } catch (const NonConvergenceError& e) {
      CHECK(e.category() == ErrorCategory::NonConvergence);
      CHECK_FALSE(e.partial().converged);
      CHECK(e.partial().theta_hat.size() == 4);
    }
  }
}

TEST_CASE("fits are deterministic") {
  const auto pe = GeneratorFamily::log_power_exponential(0.3);
  const Dataset d = fixture::sample(pe, 0.1, 200, 0.4, 81);
  FitConfig cfg;
  cfg.xi_grid = {0.0, 0.3, 0.6};
  const FitResult a = fit({pe, 0.1, d.psi}, d, cfg);
  const FitResult b = fit({pe, 0.1, d.psi}, d, cfg);
  CHECK(a.theta_hat.flat() == b.theta_hat.flat());
  CHECK(a.se == b.se);
  CHECK(a.xi_hat == b.xi_hat);
}
