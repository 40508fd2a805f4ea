#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace quadinv {

/// Seeded pseudorandom stream.
///
/// Generator: xoshiro256** (Blackman and Vigna), state filled from the seed
/// with splitmix64. Uniform doubles take the top 53 bits. Normal deviates use
/// the Box-Muller transform on two uniforms, caching the second deviate.
/// Index draws use rejection on the top of the 64-bit range, so results are
/// unbiased and do not depend on the standard library's distributions.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  /// Standard normal.
  double normal() noexcept;
  /// Uniform in {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n);
  /// Fisher-Yates shuffle of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
  std::optional<double> spare_normal_;
};

} // namespace quadinv
