#pragma once

#include <cstdint>
#include <cmath>

namespace comb {

// Splittable counter-seeded generator: every replica derives its own stream
// from (master_seed, stream_index), so parallel runs are order-independent
// and a run is fully determined by the seed.
//
// Core is xoshiro256++ seeded through SplitMix64; both are fixed algorithms
// with no platform-dependent behavior (we never use std:: distributions).
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream_index) {
    // mix the pair so that nearby (seed, stream) values give unrelated states
    std::uint64_t x = master_seed ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1));
    for (auto& word : state_) word = split_mix(x);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0,1), 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}, unbiased (rejection on the high bits)
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      __uint128_t m = static_cast<__uint128_t>(r) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  static std::uint64_t split_mix(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace comb
