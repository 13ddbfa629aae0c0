#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace synthpop {

/// Seedable random stream. Only the raw 64-bit engine output is used, so draws
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Index drawn proportionally to non-negative `weights`; returns
  /// weights.size() if they sum to zero.
  std::size_t weighted_index(std::span<const double> weights);
  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF lookup: the first index whose cumulative weight exceeds
/// u * total. Zero-weight entries are never returned.
std::size_t inverse_cdf(std::span<const double> weights, double u);

std::uint64_t splitmix64(std::uint64_t x);
/// Stable child seed derived from a parent seed and a textual key.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace synthpop
