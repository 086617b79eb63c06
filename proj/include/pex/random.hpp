// Apache License, Version 2.0, refer to LICENSE.txt

// Seed derivation and uniform draws with a fixed, library-independent bit
// recipe, so sampled traces are identical across standard libraries.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pex {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixes a base seed with task keys (replicate, grid point, class, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t key : keys) h = splitmix64(h ^ splitmix64(key));
  return h;
}

// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace pex
