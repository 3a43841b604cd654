#include "lsqtobit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsqtobit {

namespace {

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd grad;
};

class LineSearch {
 public:
  LineSearch(const Objective& objective, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double f0,
             double slope0, const BfgsOptions& options, int& evaluations)
      : objective_(objective),
        x_(x),
        dir_(dir),
        f0_(f0),
        slope0_(slope0),
        options_(options),
        evaluations_(evaluations) {}

  // Returns true with `out` set when a strong Wolfe point was found, or a
  // point with sufficient decrease once the iteration budget runs out.
  bool run(double alpha_init, Trial& out) {
    Trial prev{0.0, f0_, slope0_, {}};
    double alpha = alpha_init;
    for (int i = 0; i < options_.max_line_search; ++i) {
      Trial cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + options_.c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, out);
      }
      if (std::fabs(cur.slope) <= -options_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Trial eval(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.grad.resize(x_.size());
    t.f = objective_(x_ + alpha * dir_, t.grad);
    ++evaluations_;
    if (std::isnan(t.f)) t.f = std::numeric_limits<double>::infinity();
    t.slope = std::isfinite(t.f) ? t.grad.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    return t;
  }

  bool sufficient(const Trial& t) const {
    return std::isfinite(t.f) && t.f <= f0_ + options_.c1 * t.alpha * slope0_;
  }

  // lo satisfies sufficient decrease and has the lower f; the minimizer
  // lies between lo and hi.
  bool zoom(Trial lo, Trial hi, Trial& out) {
    for (int i = 0; i < options_.max_line_search; ++i) {
      const double a = lo.alpha, b = hi.alpha;
      const double width = b - a;
      double alpha = 0.5 * (a + b);
      if (std::isfinite(hi.f) && std::isfinite(lo.slope)) {
        // minimizer of the quadratic through (a, f_lo, slope_lo) and (b, f_hi)
        const double denom = 2.0 * (hi.f - lo.f - lo.slope * width);
        if (denom > 0.0) alpha = a - lo.slope * width * width / denom;
      }
      const double lo_edge = std::min(a, b) + 0.1 * std::fabs(width);
      const double hi_edge = std::max(a, b) - 0.1 * std::fabs(width);
      if (!(alpha >= lo_edge && alpha <= hi_edge)) alpha = 0.5 * (a + b);
      if (std::fabs(width) < 1e-16 * std::max(1.0, std::fabs(a))) break;

      Trial cur = eval(alpha);
      if (!sufficient(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::fabs(cur.slope) <= -options_.c2 * slope0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    if (lo.alpha > 0.0 && sufficient(lo)) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  const Objective& objective_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  const BfgsOptions& options_;
  int& evaluations_;
};

}  // namespace

BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& options) {
  const Eigen::Index p = x0.size();
  BfgsResult res;
  res.x = x0;
  res.grad.resize(p);
  res.f = objective(res.x, res.grad);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !res.grad.allFinite()) {
    res.message = "objective is not finite at the starting point";
    return res;
  }

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(p, p);
  bool scaled = false;
  int stalls = 0;

  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    Eigen::VectorXd dir = -Hinv * res.grad;
    double slope = res.grad.dot(dir);
    if (!(slope < 0.0)) {
      Hinv.setIdentity();
      scaled = false;
      dir = -res.grad;
      slope = res.grad.dot(dir);
    }
    const double alpha_init = scaled ? 1.0 : std::min(1.0, 1.0 / res.grad.lpNorm<Eigen::Infinity>());

    Trial step;
    LineSearch search(objective, res.x, dir, res.f, slope, options, res.evaluations);
    if (!search.run(alpha_init, step)) {
      if (scaled) {
        // drop curvature information and retry along steepest descent
        Hinv.setIdentity();
        scaled = false;
        continue;
      }
      res.message = "line search failed";
      return res;
    }

    const Eigen::VectorXd s = step.alpha * dir;
    const Eigen::VectorXd y = step.grad - res.grad;
    const double f_old = res.f;
    res.x += s;
    res.f = step.f;
    res.grad = step.grad;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        Hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = Hinv * y;
      // (I - rho s y') H (I - rho y s') + rho s s'
      Hinv += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }

    if (std::fabs(f_old - res.f) <= 1e-15 * std::max(1.0, std::fabs(res.f))) {
      if (++stalls >= 3) {
        res.converged = res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol;
        res.message = "no further progress";
        return res;
      }
    } else {
      stalls = 0;
    }
  }
  res.converged = res.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

}  // namespace lsqtobit
