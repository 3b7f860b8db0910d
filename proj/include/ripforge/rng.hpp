#pragma once

#include <cstdint>

namespace ripforge {

// Counter-based deterministic RNG: each (master_seed, trial_index) pair
// yields an independent stream, so trials are reproducible in any execution
// order. Core generator is splitmix64 with a strong seed mix.
class TrialRng {
 public:
  TrialRng(std::uint64_t master_seed, std::uint64_t trial_index) {
    state_ = mix(master_seed + kGolden * (trial_index + 1));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1} via 128-bit multiply-shift (no modulo bias worth
  // speaking of at these ranges; deterministic and branch-free).
  int next_below(int n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) *
        static_cast<unsigned __int128>(static_cast<std::uint64_t>(n));
    return static_cast<int>(wide >> 64);
  }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double next_gaussian();

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  std::uint64_t state_ = 0;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace ripforge
