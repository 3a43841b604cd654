#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lsqtobit {

enum class FamilyKind {
  LogNormal,
  LogStudentT,
  LogPowerExponential,
  ExtendedBirnbaumSaunders,
};

/// Density generator of a log-symmetric family together with its extra
/// shape parameter. Everything here describes the standardized symmetric
/// variable Z on the real line with density eta * g(z^2); the log-scale
/// distributions are built on top of it by the qls_* functions.
///
/// Parameter domains:
///   LogStudentT               xi > 0 (degrees of freedom)
///   LogPowerExponential       -1 < xi <= 1
///   ExtendedBirnbaumSaunders  xi > 0
/// LogNormal has no extra parameter; xi() reports 0 for it.
///
/// All members are const and thread-safe.
class GeneratorFamily {
 public:
  GeneratorFamily() : GeneratorFamily(FamilyKind::LogNormal, 0.0) {}
  GeneratorFamily(FamilyKind kind, double xi);

  static GeneratorFamily log_normal() { return {FamilyKind::LogNormal, 0.0}; }
  static GeneratorFamily log_student_t(double xi) { return {FamilyKind::LogStudentT, xi}; }
  static GeneratorFamily log_power_exponential(double xi) {
    return {FamilyKind::LogPowerExponential, xi};
  }
  static GeneratorFamily extended_birnbaum_saunders(double xi) {
    return {FamilyKind::ExtendedBirnbaumSaunders, xi};
  }

  FamilyKind kind() const noexcept { return kind_; }
  double xi() const noexcept { return xi_; }
  bool has_extra_parameter() const noexcept { return kind_ != FamilyKind::LogNormal; }

  /// Same family with a different extra parameter.
  GeneratorFamily with_xi(double xi) const { return {kind_, xi}; }

  /// Short CLI name: lognormal, logt, logpe, ebs.
  std::string_view name() const noexcept;
  /// Human readable label including xi, e.g. "log-t(xi=4)".
  std::string label() const;

  double log_normalizer() const noexcept { return log_eta_; }

  /// eta * g(u), the normalized generator. u >= 0.
  double generator(double u) const;
  double log_generator(double u) const;

  /// g'(u) / g(u). May be -inf at u = 0 for the power-exponential family
  /// with xi > 0, where the generator has a cusp.
  double delta_ratio(double u) const;

  /// d/dz log g(z^2) = 2 z delta_ratio(z^2), finite for every z.
  double log_density_slope(double z) const;

  /// CDF G of the standardized variable and its logarithm.
  double cdf(double z) const;
  double log_cdf(double z) const;

  /// G^{-1}(p) for 0 < p < 1, accurate to 1e-10 in G.
  double quantile(double p) const;

  /// g_norm(z^2) / G(z). Evaluated in log space in the far tails.
  double pi_ratio(double z) const;

  /// Variance of Z, +inf for log-t with xi <= 2.
  double variance() const;

 private:
  FamilyKind kind_;
  double xi_;
  double log_eta_;
};

/// Parse a CLI family name (lognormal, logt, logpe, ebs).
FamilyKind parse_family_kind(std::string_view name);

/// Profile grid used when the extra parameter is estimated by profiling.
std::vector<double> default_xi_grid(FamilyKind kind);

/// Quantile parameterization of a log-symmetric law: T has 100q-th
/// quantile Q and power parameter phi.
struct QlsParams {
  double q = 0.5;
  double Q = 1.0;
  double phi = 1.0;
};

void validate(const QlsParams& params);

/// z_q = G^{-1}(q), the standardized offset that makes Q the q-quantile.
inline double quantile_offset(const GeneratorFamily& family, double q) { return family.quantile(q); }

double qls_pdf(const GeneratorFamily& family, const QlsParams& params, double t);
double qls_log_pdf(const GeneratorFamily& family, const QlsParams& params, double t);
double qls_cdf(const GeneratorFamily& family, const QlsParams& params, double t);
/// 1 - qls_cdf, computed without cancellation.
double qls_survival(const GeneratorFamily& family, const QlsParams& params, double t);
double qls_quantile(const GeneratorFamily& family, const QlsParams& params, double p);

/// n draws by inverse transform, log T = log Q + sqrt(phi) (Z - z_q).
std::vector<double> qls_sample(const GeneratorFamily& family, const QlsParams& params,
                               std::size_t n, std::uint64_t seed);

}  // namespace lsqtobit
