#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace spchar {

// FNV-1a, 64-bit. Multi-byte integers and floats are fed little-endian so
// digests are stable across hosts and reproducible from other languages.
class Fnv1a64 {
public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void bytes(const void* data, std::size_t len) {
    auto p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= kPrime;
    }
  }

  void text(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u32(bits);
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }

  template <class T>
  void span_of(std::span<const T> values) {
    u64(values.size());
    for (const T& v : values) {
      if constexpr (std::is_same_v<T, float>) f32(v);
      else if constexpr (std::is_same_v<T, double>) f64(v);
      else if constexpr (sizeof(T) == 4) u32(static_cast<std::uint32_t>(v));
      else u64(static_cast<std::uint64_t>(v));
    }
  }

  [[nodiscard]] std::uint64_t value() const { return state_; }
  [[nodiscard]] std::string hex() const;

private:
  std::uint64_t state_ = kOffset;
};

std::string to_hex64(std::uint64_t v);

inline std::string Fnv1a64::hex() const { return to_hex64(state_); }

inline std::string to_hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string digest_text(std::string_view s) {
  Fnv1a64 h;
  h.bytes(s.data(), s.size());
  return h.hex();
}

}  // namespace spchar
