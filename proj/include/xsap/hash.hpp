#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace xsap {

// 64-bit FNV-1a. Fixed constants, byte order independent: the same string
// hashes to the same id on every platform.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x00000100000001b3ULL;
  }
  return h;
}

// 128 bits from two independently salted FNV-1a passes. Used for dedup sets
// over hundreds of millions of keys where storing the keys themselves would
// not fit; the collision probability at 10^8 entries is ~1e-22.
struct Hash128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool operator==(const Hash128&) const = default;
};

inline Hash128 fnv1a128(std::string_view bytes) {
  std::uint64_t a = 0xcbf29ce484222325ULL;
  std::uint64_t b = 0xaf63bd4c8601b7dfULL;  // same prime, different basis
  for (unsigned char c : bytes) {
    a = (a ^ c) * 0x00000100000001b3ULL;
    b = (b ^ c) * 0x00000100000001b3ULL;
  }
  return {a, b};
}

struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const {
    return static_cast<std::size_t>(h.lo ^ (h.hi * 0x9e3779b97f4a7c15ULL));
  }
};

}  // namespace xsap
