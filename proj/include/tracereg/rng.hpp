#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <random>

namespace tracereg {

// Reproducibility contract: every random draw in this library goes through
// Rng below. The engine is std::mt19937_64, whose output sequence is pinned
// bit-for-bit by the C++ standard, and all transforms (normal, bernoulli,
// bounded int) are written out by hand because std::normal_distribution and
// friends are implementation-defined. Same seed => same bytes, on any
// conforming platform.

/// splitmix64 finalizer step (Steele/Lea/Vigna). Used both as a stream mixer
/// and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a2ca9f1d30e3ULL;
  return z ^ (z >> 31);
}

/// Derives a child seed by absorbing a list of salts (study tag, d, n,
/// replication index, ...) into a splitmix64 chain. Order matters; collisions
/// between distinct salt lists are as unlikely as 64-bit hash collisions.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> salts) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  for (std::uint64_t v : salts) {
    s ^= v + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    (void)splitmix64(s);
  }
  return splitmix64(s);
}

/// Seedable generator with bit-reproducible transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits (the full double mantissa).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (exact rejection, no
  /// libm quantile approximations). Caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Bernoulli(p) as a single uniform threshold.
  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  /// Uniform integer in [0, n) by 64-bit rejection sampling (unbiased).
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tracereg
