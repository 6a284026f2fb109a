#ifndef STMRF_RNG_HPP
#define STMRF_RNG_HPP

/* Seeded random number generation with reproducible substreams.
 *
 * All randomness in the library flows through this wrapper so that runs are
 * bit-identical given a seed.  Variate transforms (uniform, normal, gamma)
 * are implemented here rather than with std::*_distribution, whose output
 * sequences differ across standard library implementations.
 */

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace stmrf {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent stream keyed off this generator's seed (not its state),
  /// so substream k is the same no matter how many draws preceded it.
  Rng substream(std::uint64_t key) const {
    return Rng(splitmix64(seed_ ^ splitmix64(key ^ 0x5851f42d4c957f2dULL)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1); never returns 0 (safe under log()).
  double uniform01_pos() {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n); mask rejection keeps this portable.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t r = engine_() & mask;
      if (r < n) return r;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, scale) by Marsaglia-Tsang squeeze; shape < 1 handled by
  /// the boost trick gamma(shape+1) * U^(1/shape).
  double gamma(double shape, double scale) {
    assert(shape > 0.0 && scale > 0.0);
    if (shape < 1.0) {
      const double u = uniform01_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

  /// Partial Fisher-Yates: the first k entries of idx become a uniform
  /// sample without replacement from {0, ..., n-1}.
  template <typename Vec>
  void sample_prefix(Vec& idx, std::size_t k) {
    const std::size_t n = idx.size();
    assert(k <= n);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace stmrf

#endif
