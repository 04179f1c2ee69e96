#pragma once

#include <cstdint>

namespace nbet {

/// Counter-based splittable generator. Each value is a SplitMix64 finalizer
/// applied to key + counter * golden, so streams can be split by index and
/// replayed independently of scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ULL)) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent child stream number `index`.
  CounterRng split(std::uint64_t index) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(index + 0xD1B54A32D192ED03ULL));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next() { return mix(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
      const std::uint64_t r = next();
      if (r < limit) return r % n;
    }
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace nbet
