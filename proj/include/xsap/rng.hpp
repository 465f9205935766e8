#pragma once

#include <cstdint>
#include <vector>

namespace xsap {

// Deterministic 64-bit generator (xoshiro256** seeded via splitmix64).
// Everything that samples in this library goes through this engine so that
// a run is reproducible bit-for-bit from a single seed, on any platform.
// std::* distributions are deliberately avoided: their outputs are
// implementation-defined and would break cross-platform determinism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform integer in [0, n). n must be > 0. Plain modulo: the bias at
  // n << 2^64 is far below anything observable here and the mapping is
  // trivially portable.
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // First k entries of a Fisher-Yates pass over [0, n): a uniform sample of
  // k distinct indices, in shuffled order.
  std::vector<std::uint32_t> sample_indices(std::uint32_t n, std::uint32_t k) {
    std::vector<std::uint32_t> idx(n);
    for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
    for (std::uint32_t i = 0; i < k && i + 1 < n; ++i) {
      const auto j = i + static_cast<std::uint32_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace xsap
