#pragma once

#include <cstdint>
#include <vector>

namespace remse {

/// Deterministic 64-bit generator (SplitMix64). The algorithm is fixed for
/// the life of the project: identical seeds reproduce identical draw
/// sequences on every platform, which all fixtures and dataset generation
/// rely on.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed), seed_(seed) {}

  std::uint64_t seed_used() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();
  double normal(double mean, double sd);

  /// exp(Uniform(log lo, log hi)); requires 0 < lo <= hi.
  double log_uniform(double lo, double hi);

  /// Uniform integer in [0, n) without modulo bias (Lemire reduction).
  std::uint64_t next_below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

private:
  std::uint64_t state_;
  std::uint64_t seed_;
};

}  // namespace remse
