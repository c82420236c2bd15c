#pragma once

#include <cstdint>

namespace cln {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with portable bounded sampling. All randomized code in the
/// library draws through this type so that runs are reproducible across
/// platforms (std::uniform_int_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, n). Rejection-free Lemire reduction with a widening check.
  std::uint64_t below(std::uint64_t n) {
    // n == 0 is a caller bug; keep the check cheap.
    unsigned __int128 m = (unsigned __int128)next() * n;
    std::uint64_t lo = (std::uint64_t)m;
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = (unsigned __int128)next() * n;
        lo = (std::uint64_t)m;
      }
    }
    return (std::uint64_t)(m >> 64);
  }

  std::uint32_t below32(std::uint32_t n) { return (std::uint32_t)below(n); }

  /// Uniform double in [0, 1).
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Deterministic per-task stream derivation: a counter-based construction
/// where stream i is keyed by two splitmix64 scrambles of (seed, i). Streams
/// for distinct indices are disjoint for all practical purposes.
inline Rng seed_stream(std::uint64_t master_seed, std::uint64_t task_index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (task_index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t b = splitmix64(s);
  s = b + task_index;
  std::uint64_t c = splitmix64(s);
  return Rng(b ^ (c << 1) ^ task_index);
}

}  // namespace cln
