#include "lsqtobit/rng.hpp"

#include "lsqtobit/errors.hpp"
#include "special.hpp"

namespace lsqtobit {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::normal() { return detail::norm_quantile(uniform()); }

std::string_view category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::RankDeficient: return "rank-deficient";
    case ErrorCategory::NonConvergence: return "non-convergence";
    case ErrorCategory::SingularInformation: return "singular-information";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

}  // namespace lsqtobit
