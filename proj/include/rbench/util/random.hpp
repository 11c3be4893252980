#pragma once

// Portable seeded randomness. std::mt19937_64's output sequence is fixed by
// the standard; the distributions below are written out by hand because the
// standard library's distributions are implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>

namespace rbench {

/// One step of the splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the index-th independent stream derived from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return splitmix64(base ^ index); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Symmetric range [-half_width, half_width]; zero width consumes no draw.
  double symmetric(double half_width) {
    if (half_width == 0.0) return 0.0;
    return uniform(-half_width, half_width);
  }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rbench
