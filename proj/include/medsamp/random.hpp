#pragma once

#include <cstdint>
#include <random>

namespace medsamp {

using RandomStream = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed for replicate `index` of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
inline std::uint64_t uniform_below(RandomStream& rng, std::uint64_t bound) {
  std::uint64_t x = rng();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// True with probability exactly num/den.
inline bool bernoulli(RandomStream& rng, std::uint64_t num, std::uint64_t den) {
  if (num == 0) return false;
  if (num >= den) return true;
  return uniform_below(rng, den) < num;
}

}  // namespace medsamp
