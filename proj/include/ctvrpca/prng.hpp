#pragma once

#include <cstdint>
#include <optional>

namespace ctvrpca {

/// splitmix64 step; also used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes a base seed with stream coordinates into a new seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0);

/// xoshiro256** seeded through splitmix64. The stream is fully specified, so
/// a seed reproduces the same values on every platform.
///
/// uniform() uses the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).
/// normal() is Box-Muller on two consecutive uniforms u1, u2:
///   r = sqrt(-2 ln(1 - u1)), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2);
/// z0 is returned and z1 is kept for the next normal() call.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double normal();
  /// Uniform integer in [0, n) by rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_normal_;
};

}  // namespace ctvrpca
