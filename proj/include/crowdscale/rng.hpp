#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace crowdscale {

/// splitmix64 finaliser: a bijective avalanche hash of 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based normal variates: the value depends only on (seed, stream,
/// counter), so results do not depend on how work is split across threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter, std::uint64_t lane = 0) const {
    return mix64(mix64(mix64(seed_ ^ 0x5851f42d4c957f2dull) ^ stream) ^ (counter * 4 + lane));
  }

  /// Uniform in (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter, std::uint64_t lane = 0) const {
    return (static_cast<double>(bits(stream, counter, lane) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller on two independent lanes.
  double normal(std::uint64_t stream, std::uint64_t counter) const {
    const double u1 = uniform(stream, counter, 0);
    const double u2 = uniform(stream, counter, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace crowdscale
