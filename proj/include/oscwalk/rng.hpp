#pragma once

#include <cstdint>

namespace oscwalk {

// Counter-based generator: draw i of stream s is mix(key(seed, s) + i * gamma),
// the SplitMix64 finalizer over a Weyl sequence. Streams never share state, so
// trajectories can run on any thread and still produce identical draws.
// The algorithm is part of the output contract; do not change within a major
// version.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream * kGamma + 1))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // uniform on [0,1) with 53 random bits
  double next_unit() {
    return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace oscwalk
