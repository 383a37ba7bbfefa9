#pragma once

#include <cstdint>
#include <limits>

namespace hermcs {

/// SplitMix64 finalizer. Used both as the trial-seed mixing function and as
/// the output stage of the generator below.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trial seed: mix(master_seed + golden_gamma * (trial_index + 1)).
/// Stable across platforms, so trial sets can be split over workers freely.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
  return splitmix64_mix(master_seed + 0x9e3779b97f4a7c15ULL * (trial_index + 1));
}

/// Seed of an independent stream (e.g. one point of a parameter sweep).
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) noexcept {
  return splitmix64_mix(master_seed ^ (0xd1b54a32d192ed03ULL * (stream_index + 1)));
}

/// Counter-based SplitMix64 engine. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  /// Unbiased integer in [0, bound) (Lemire's multiply-and-reject). bound > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t floor = (0 - bound) % bound;
      while (low < floor) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace hermcs
