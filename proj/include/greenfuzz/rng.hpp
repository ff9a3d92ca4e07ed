// rng.hpp
//
// Deterministic PRNG for mutation and scheduling decisions. The standard
// <random> distributions are implementation-defined, so campaigns seeded
// with the same value could diverge across toolchains; this xoshiro256**
// core with splitmix64 seeding produces the same stream everywhere.

#pragma once

#include <array>
#include <cstdint>

namespace greenfuzz {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
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

  // Uniform in [0, n). n == 0 returns 0.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    return next() % n;
  }

  // Uniform in [lo, hi] inclusive.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  bool one_in(std::uint64_t n) { return below(n) == 0; }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

// Derives the campaign seed for repetition `rep` of an experiment so that
// every configuration arm of the same repetition shares it.
inline std::uint64_t derive_rep_seed(std::uint64_t base_seed,
                                     std::uint32_t rep) {
  std::uint64_t s = base_seed ^ (0xa5a5a5a5a5a5a5a5ULL + rep);
  return splitmix64(s);
}

}  // namespace greenfuzz
