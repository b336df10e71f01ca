#pragma once

#include <cstdint>
#include <random>

namespace v2x {

// SplitMix64 finalizer. A bijection on 64-bit words, so distinct inputs give
// distinct outputs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-streams of one run seed.
enum class Stream : std::uint64_t {
  kScenario = 1,
  kFading = 2,
  kInit = 3,
  kOccupancy = 4,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

using Rng = std::mt19937_64;

}  // namespace v2x
