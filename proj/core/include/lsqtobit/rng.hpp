#pragma once

#include <cstdint>
#include <random>

namespace lsqtobit {

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator with platform-independent uniform draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed, 0)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lsqtobit
