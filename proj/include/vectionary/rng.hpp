/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <cstdint>

namespace vectionary {

/// splitmix64: fully specified, so streams are identical across platforms
/// and standard libraries (std::uniform_int_distribution is not).
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n). Modulo bias is < n / 2^64, irrelevant at any
  /// realistic n; the draw stays bit-reproducible everywhere.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

/// Key a substream by (seed, index). Each bootstrap resample gets its own
/// generator, so results do not depend on worker count or execution order.
inline SplitMix64 keyed_stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed ^ (0x8f0c2f80bd11a0a5ULL + index * 0x9e3779b97f4a7c15ULL));
  // Burn one output through the mixer to decorrelate adjacent keys.
  return SplitMix64(mixer.next());
}

}  // namespace vectionary
