#pragma once

#include <cstdint>
#include <random>

namespace pacgibbs {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based sub-seed: independent streams from one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

// Stream tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t kInit = 0x11;
inline constexpr std::uint64_t kShuffle = 0x22;
inline constexpr std::uint64_t kNoise = 0x33;
inline constexpr std::uint64_t kAux = 0x44;
inline constexpr std::uint64_t kSplit = 0x55;
inline constexpr std::uint64_t kPrior = 0x66;
inline constexpr std::uint64_t kData = 0x77;
inline constexpr std::uint64_t kRun = 0x88;
}  // namespace stream

}  // namespace pacgibbs
