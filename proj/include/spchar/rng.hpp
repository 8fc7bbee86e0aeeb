#pragma once

#include <cstdint>

namespace spchar {

/// Counter-based pseudo-random streams, algorithm id "spchar-ctr-splitmix64-v1".
///
/// Every draw is a pure function of (key, counter):
///
///   mix64(z)            = SplitMix64 finalizer:
///                         z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
///                         z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
///   derive(parent, tag) = mix64(parent ^ mix64(tag + GOLDEN))
///   draw k (k = 1, 2, ...) of stream `key` = mix64(key + k * GOLDEN)
///
/// with GOLDEN = 0x9e3779b97f4a7c15 and all arithmetic modulo 2^64. Doubles
/// are formed from the top 53 bits. Any language with 64-bit unsigned
/// wrapping arithmetic reproduces the same stream.
inline constexpr const char* kRngAlgorithm = "spchar-ctr-splitmix64-v1";

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  return mix64(parent ^ mix64(tag + kGolden));
}

class CounterStream {
public:
  constexpr explicit CounterStream(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform in [0, 1).
  constexpr double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in the open interval (0, 1).
  constexpr double next_open_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound); bound > 0.
  constexpr std::uint64_t next_below(std::uint64_t bound) {
    auto r = static_cast<std::uint64_t>(next_unit() * static_cast<double>(bound));
    return r < bound ? r : bound - 1;
  }

  [[nodiscard]] constexpr std::uint64_t key() const { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spchar
