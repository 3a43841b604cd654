#include "lsqtobit/generators.hpp"

#include "lsqtobit/errors.hpp"
#include "lsqtobit/rng.hpp"
#include "special.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lsqtobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_cosh(double s) {
  const double a = std::fabs(s);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// Shape of the incomplete-gamma representation of the power-exponential
// CDF: |Z|^a / 2 ~ Gamma(alpha, 1), a = 2 / (1 + xi), alpha = 1 / a.
struct PeShape {
  double a;
  double alpha;
};

PeShape pe_shape(double xi) { return {2.0 / (1.0 + xi), 0.5 * (1.0 + xi)}; }

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "probability must lie in (0,1), got " << p;
    throw DomainError(os.str());
  }
}

}  // namespace

GeneratorFamily::GeneratorFamily(FamilyKind kind, double xi) : kind_(kind), xi_(xi), log_eta_(0.0) {
  std::ostringstream os;
  switch (kind_) {
    case FamilyKind::LogNormal:
      xi_ = 0.0;
      log_eta_ = -0.5 * std::log(2.0 * std::numbers::pi);
      break;
    case FamilyKind::LogStudentT:
      if (!(xi > 0.0) || !std::isfinite(xi)) {
        os << "log-t requires xi > 0, got " << xi;
        throw DomainError(os.str());
      }
      log_eta_ = std::lgamma(0.5 * (xi + 1.0)) - std::lgamma(0.5 * xi) -
                 0.5 * std::log(xi * std::numbers::pi);
      break;
    case FamilyKind::LogPowerExponential:
      if (!(xi > -1.0 && xi <= 1.0)) {
        os << "log-power-exponential requires -1 < xi <= 1, got " << xi;
        throw DomainError(os.str());
      }
      log_eta_ = -std::log1p(xi) - 0.5 * (1.0 + xi) * std::numbers::ln2 - std::lgamma(0.5 * (1.0 + xi));
      break;
    case FamilyKind::ExtendedBirnbaumSaunders:
      if (!(xi > 0.0) || !std::isfinite(xi)) {
        os << "extended Birnbaum-Saunders requires xi > 0, got " << xi;
        throw DomainError(os.str());
      }
      log_eta_ = std::log(2.0 / (xi * std::sqrt(2.0 * std::numbers::pi)));
      break;
  }
}

std::string_view GeneratorFamily::name() const noexcept {
  switch (kind_) {
    case FamilyKind::LogNormal: return "lognormal";
    case FamilyKind::LogStudentT: return "logt";
    case FamilyKind::LogPowerExponential: return "logpe";
    case FamilyKind::ExtendedBirnbaumSaunders: return "ebs";
  }
  return "unknown";
}

std::string GeneratorFamily::label() const {
  std::ostringstream os;
  switch (kind_) {
    case FamilyKind::LogNormal: return "log-normal";
    case FamilyKind::LogStudentT: os << "log-t(xi=" << xi_ << ")"; break;
    case FamilyKind::LogPowerExponential: os << "log-PE(xi=" << xi_ << ")"; break;
    case FamilyKind::ExtendedBirnbaumSaunders: os << "EBS(xi=" << xi_ << ")"; break;
  }
  return os.str();
}

double GeneratorFamily::log_generator(double u) const {
  if (!(u >= 0.0)) throw DomainError("generator argument must be non-negative");
  switch (kind_) {
    case FamilyKind::LogNormal:
      return log_eta_ - 0.5 * u;
    case FamilyKind::LogStudentT:
      return log_eta_ - 0.5 * (xi_ + 1.0) * std::log1p(u / xi_);
    case FamilyKind::LogPowerExponential:
      return log_eta_ - 0.5 * std::pow(u, 1.0 / (1.0 + xi_));
    case FamilyKind::ExtendedBirnbaumSaunders: {
      const double s = std::sqrt(u);
      if (s > 350.0) return -kInf;
      const double sh = std::sinh(s);
      return log_eta_ + log_cosh(s) - (2.0 / (xi_ * xi_)) * sh * sh;
    }
  }
  return -kInf;
}

double GeneratorFamily::generator(double u) const { return std::exp(log_generator(u)); }

double GeneratorFamily::delta_ratio(double u) const {
  if (!(u >= 0.0)) throw DomainError("generator argument must be non-negative");
  switch (kind_) {
    case FamilyKind::LogNormal:
      return -0.5;
    case FamilyKind::LogStudentT:
      return -(xi_ + 1.0) / (2.0 * (xi_ + u));
    case FamilyKind::LogPowerExponential:
      if (u == 0.0) {
        if (xi_ > 0.0) return -kInf;
        return xi_ == 0.0 ? -0.5 : 0.0;
      }
      return -std::pow(u, -xi_ / (1.0 + xi_)) / (2.0 * (1.0 + xi_));
    case FamilyKind::ExtendedBirnbaumSaunders: {
      const double s = std::sqrt(u);
      const double c = 2.0 / (xi_ * xi_);
      if (s < 1e-4) {
        // tanh(s)/(2s) and sinh(2s)/(2s) expanded to second order
        return 0.5 - u / 6.0 - c * (1.0 + 2.0 * u / 3.0);
      }
      return (std::tanh(s) - c * std::sinh(2.0 * s)) / (2.0 * s);
    }
  }
  return 0.0;
}

double GeneratorFamily::log_density_slope(double z) const {
  switch (kind_) {
    case FamilyKind::LogNormal:
      return -z;
    case FamilyKind::LogStudentT:
      return -(xi_ + 1.0) * z / (xi_ + z * z);
    case FamilyKind::LogPowerExponential: {
      if (z == 0.0) return 0.0;
      const double mag = std::pow(std::fabs(z), (1.0 - xi_) / (1.0 + xi_)) / (1.0 + xi_);
      return z > 0.0 ? -mag : mag;
    }
    case FamilyKind::ExtendedBirnbaumSaunders:
      return std::tanh(z) - (2.0 / (xi_ * xi_)) * std::sinh(2.0 * z);
  }
  return 0.0;
}

double GeneratorFamily::cdf(double z) const {
  if (std::isnan(z)) throw DomainError("cdf argument is NaN");
  switch (kind_) {
    case FamilyKind::LogNormal:
      return detail::norm_cdf(z);
    case FamilyKind::LogStudentT:
      if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
      return boost::math::cdf(boost::math::students_t_distribution<double>(xi_), z);
    case FamilyKind::LogPowerExponential: {
      if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
      const auto [a, alpha] = pe_shape(xi_);
      const double x = 0.5 * std::pow(std::fabs(z), a);
      const double upper = 0.5 * boost::math::gamma_q(alpha, x);
      return z < 0.0 ? upper : 1.0 - upper;
    }
    case FamilyKind::ExtendedBirnbaumSaunders:
      return detail::norm_cdf((2.0 / xi_) * std::sinh(z));
  }
  return 0.0;
}

double GeneratorFamily::log_cdf(double z) const {
  if (std::isnan(z)) throw DomainError("cdf argument is NaN");
  switch (kind_) {
    case FamilyKind::LogNormal:
      return detail::log_norm_cdf(z);
    case FamilyKind::LogStudentT: {
      if (std::isinf(z)) return z > 0 ? 0.0 : -kInf;
      const boost::math::students_t_distribution<double> dist(xi_);
      if (z > 0.0) return std::log1p(-boost::math::cdf(dist, -z));
      const double c = boost::math::cdf(dist, z);
      if (c > std::numeric_limits<double>::min()) return std::log(c);
      // polynomial tail: G(z) ~ eta nu^((nu+1)/2) |z|^-nu / nu
      return log_eta_ + 0.5 * (xi_ + 1.0) * std::log(xi_) - xi_ * std::log(-z) - std::log(xi_);
    }
    case FamilyKind::LogPowerExponential: {
      if (std::isinf(z)) return z > 0 ? 0.0 : -kInf;
      const auto [a, alpha] = pe_shape(xi_);
      const double x = 0.5 * std::pow(std::fabs(z), a);
      if (z >= 0.0) return std::log1p(-0.5 * boost::math::gamma_q(alpha, x));
      return -std::numbers::ln2 + detail::log_gamma_q(alpha, x);
    }
    case FamilyKind::ExtendedBirnbaumSaunders:
      return detail::log_norm_cdf((2.0 / xi_) * std::sinh(z));
  }
  return 0.0;
}

double GeneratorFamily::quantile(double p) const {
  check_probability(p);
  if (p == 0.5) return 0.0;
  switch (kind_) {
    case FamilyKind::LogNormal:
      return detail::norm_quantile(p);
    case FamilyKind::LogStudentT:
      return boost::math::quantile(boost::math::students_t_distribution<double>(xi_), p);
    case FamilyKind::LogPowerExponential: {
      // Closed-form start from the inverse incomplete gamma, then polished by
      // a bracketed Newton iteration on G itself.
      const auto [a, alpha] = pe_shape(xi_);
      const double x = p < 0.5 ? boost::math::gamma_q_inv(alpha, 2.0 * p)
                               : boost::math::gamma_q_inv(alpha, 2.0 * (1.0 - p));
      const double mag = std::pow(2.0 * x, 1.0 / a);
      const double start = p < 0.5 ? -mag : mag;
      return detail::solve_increasing(
          [&](double z) { return cdf(z) - p; }, [&](double z) { return generator(z * z); }, start,
          1e-14);
    }
    case FamilyKind::ExtendedBirnbaumSaunders:
      return std::asinh(0.5 * xi_ * detail::norm_quantile(p));
  }
  return 0.0;
}

double GeneratorFamily::pi_ratio(double z) const {
  if (std::isinf(z)) return z > 0 ? 0.0 : kInf;
  if (kind_ == FamilyKind::LogNormal) return detail::norm_hazard(z);
  if (kind_ == FamilyKind::ExtendedBirnbaumSaunders) {
    // g(z^2) / G(z) = (2/xi) cosh z * phi(x) / Phi(x), x = (2/xi) sinh z
    const double x = (2.0 / xi_) * std::sinh(z);
    if (std::isinf(x)) return z > 0 ? 0.0 : kInf;
    return (2.0 / xi_) * std::cosh(z) * detail::norm_hazard(x);
  }
  if (z >= 0.0) return generator(z * z) / cdf(z);
  return std::exp(log_generator(z * z) - log_cdf(z));
}

double GeneratorFamily::variance() const {
  switch (kind_) {
    case FamilyKind::LogNormal:
      return 1.0;
    case FamilyKind::LogStudentT:
      return xi_ > 2.0 ? xi_ / (xi_ - 2.0) : kInf;
    case FamilyKind::LogPowerExponential:
      return std::exp((1.0 + xi_) * std::numbers::ln2 + std::lgamma(1.5 * (1.0 + xi_)) -
                      std::lgamma(0.5 * (1.0 + xi_)));
    case FamilyKind::ExtendedBirnbaumSaunders: {
      // Z = asinh(xi N / 2) with N standard normal
      const double half_xi = 0.5 * xi_;
      auto integrand = [half_xi](double y) {
        const double z = std::asinh(half_xi * y);
        return z * z * std::exp(-0.5 * y * y);
      };
      const double integral =
          boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -kInf, kInf, 15, 1e-12);
      return integral / std::sqrt(2.0 * std::numbers::pi);
    }
  }
  return kInf;
}

FamilyKind parse_family_kind(std::string_view name) {
  if (name == "lognormal" || name == "log-normal" || name == "lno") return FamilyKind::LogNormal;
  if (name == "logt" || name == "log-t") return FamilyKind::LogStudentT;
  if (name == "logpe" || name == "log-pe") return FamilyKind::LogPowerExponential;
  if (name == "ebs") return FamilyKind::ExtendedBirnbaumSaunders;
  throw Error(ErrorCategory::Config, "unknown family '" + std::string(name) +
                                         "' (expected lognormal, logt, logpe or ebs)");
}

std::vector<double> default_xi_grid(FamilyKind kind) {
  std::vector<double> grid;
  switch (kind) {
    case FamilyKind::LogNormal:
      break;
    case FamilyKind::LogStudentT:
      for (int i = 1; i <= 20; ++i) grid.push_back(i);
      break;
    case FamilyKind::LogPowerExponential:
      for (int i = -9; i <= 10; ++i) grid.push_back(i / 10.0);
      break;
    case FamilyKind::ExtendedBirnbaumSaunders:
      for (int i = 1; i <= 20; ++i) grid.push_back(i / 10.0);
      break;
  }
  return grid;
}

void validate(const QlsParams& params) {
  std::ostringstream os;
  if (!(params.q > 0.0 && params.q < 1.0)) os << "q must lie in (0,1), got " << params.q;
  else if (!(params.Q > 0.0) || !std::isfinite(params.Q)) os << "Q must be positive, got " << params.Q;
  else if (!(params.phi > 0.0) || !std::isfinite(params.phi)) os << "phi must be positive, got " << params.phi;
  else return;
  throw DomainError(os.str());
}

namespace {

double standardized(const GeneratorFamily& family, const QlsParams& params, double t) {
  validate(params);
  if (!(t > 0.0)) throw DomainError("QLS support is t > 0");
  const double sqrt_phi = std::sqrt(params.phi);
  return (std::log(t) - std::log(params.Q)) / sqrt_phi + family.quantile(params.q);
}

}  // namespace

double qls_log_pdf(const GeneratorFamily& family, const QlsParams& params, double t) {
  const double z = standardized(family, params, t);
  return -0.5 * std::log(params.phi) - std::log(t) + family.log_generator(z * z);
}

double qls_pdf(const GeneratorFamily& family, const QlsParams& params, double t) {
  return std::exp(qls_log_pdf(family, params, t));
}

double qls_cdf(const GeneratorFamily& family, const QlsParams& params, double t) {
  return family.cdf(standardized(family, params, t));
}

double qls_survival(const GeneratorFamily& family, const QlsParams& params, double t) {
  return family.cdf(-standardized(family, params, t));
}

double qls_quantile(const GeneratorFamily& family, const QlsParams& params, double p) {
  validate(params);
  const double z_q = family.quantile(params.q);
  return params.Q * std::exp(std::sqrt(params.phi) * (family.quantile(p) - z_q));
}

std::vector<double> qls_sample(const GeneratorFamily& family, const QlsParams& params, std::size_t n,
                               std::uint64_t seed) {
  validate(params);
  if (n == 0) throw DomainError("sample size must be at least 1");
  const double z_q = family.quantile(params.q);
  const double sqrt_phi = std::sqrt(params.phi);
  const double log_Q = std::log(params.Q);
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& t : out) t = std::exp(log_Q + sqrt_phi * (family.quantile(rng.uniform()) - z_q));
  return out;
}

}  // namespace lsqtobit
