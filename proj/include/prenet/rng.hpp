#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace prenet {

/// xoshiro256** seeded through splitmix64.
///
/// Distributions are implemented here rather than taken from <random> so that
/// a given seed yields the same stream on every standard library.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent generator for a (seed, stream) pair. Used to give each
  /// stochastic stage of a run its own stream without coupling draw counts.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n); n must be positive. Unbiased (Lemire).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Marsaglia polar method, spare value cached).
  double normal();

private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates shuffle driven by Rng::below.
template <class Container>
void shuffle(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(c[i - 1], c[j]);
  }
}

}  // namespace prenet
