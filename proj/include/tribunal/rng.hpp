#pragma once

#include <cstdint>
#include <span>

namespace tribunal {

/// SplitMix64 finalizer. Used to expand seeds and derive independent substreams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives the seed of substream `stream` from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** seeded through SplitMix64.
///
/// Every derived draw (uniform, normal, poisson, ...) is implemented here
/// rather than through <random> distributions, whose output is
/// implementation-defined. Streams therefore reproduce across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  /// Box-Muller; one pair of uniforms per draw, no cached second value.
  double normal(double mean, double sd);

  /// Knuth multiplication for small rates, rounded normal approximation above 40.
  std::int64_t poisson(double lambda);

  /// Index drawn with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace tribunal
