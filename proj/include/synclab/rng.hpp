#pragma once

#include <cstdint>
#include <random>

namespace synclab {

// Deterministic random source.  std::mt19937_64 raw output is specified exactly by the
// standard and is therefore bit-portable; the std <random> distributions are not.  Every
// derived quantity below is an explicit mapping of raw engine words so that a fixed seed
// produces identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform double in [0, 1): top 53 bits of one engine word.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, m), m > 0, by rejection to erase modulo bias.
  std::uint64_t uniform_index(std::uint64_t m) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % m;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synclab
