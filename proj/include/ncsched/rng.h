#pragma once

#include <cstdint>

namespace ncsched {

/// SplitMix64 with explicit integer-to-real conversion, so that a seed yields
/// the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream `index` derived from a base seed.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  /// Standard normal (Box-Muller, both draws consumed).
  double normal();

 private:
  std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ncsched
