#pragma once

#include <cstdint>

namespace fjsrl {

// SplitMix64 stream, keyed by (seed, stream index). Pure integer arithmetic,
// so identical (seed, index) gives identical draws on every platform.
// The generator family is part of the on-disk format contract: changing it
// changes every generated instance, so it must not be swapped silently.
class RngStream {
 public:
  RngStream() : state_(mix(0x9e3779b97f4a7c15ull)) {}

  RngStream(std::uint64_t seed, std::uint64_t index) {
    state_ = mix(seed + 0x9e3779b97f4a7c15ull * (index + 1));
    state_ = mix(state_ ^ 0xbf58476d1ce4e5b9ull);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Inclusive integer uniform on [lo, hi], unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [-scale, scale].
  double uniform_symmetric(double scale) {
    return (2.0 * uniform_double() - 1.0) * scale;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace fjsrl
