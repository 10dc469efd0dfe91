#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace tabsynth {

/// Generator used for every random choice. std::mt19937_64 has a
/// standardized output sequence, so selections are portable across
/// standard libraries as long as we avoid the std distributions.
using Rng = std::mt19937_64;

/// Unbiased integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stable 64-bit hash of (seed, label): FNV-1a over the little-endian seed
/// bytes and the label, finalized with splitmix64.
inline std::uint64_t stable_hash(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001B3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(seed >> (8 * i)));
  for (char c : label) mix(static_cast<std::uint8_t>(c));
  return splitmix64(h);
}

/// Seed for rendering one track; independent of rendering order.
inline std::uint64_t track_seed(std::uint64_t master_seed, std::string_view source_id) {
  return stable_hash(master_seed, source_id);
}

}  // namespace tabsynth
