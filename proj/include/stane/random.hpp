#pragma once

// Seeded random streams. Every consumer draws from a std::mt19937_64 whose
// seed is derived from (base seed, replication, purpose) with SplitMix64, so
// replications and pipeline stages never share a stream.

#include <cstdint>
#include <random>

namespace stane {

using Rng = std::mt19937_64;

enum class Stream : std::uint64_t {
  truth = 1,
  adjacency = 2,
  init = 3,
  kmeans = 4,
  holdout = 5,
  labels = 6,
  replication = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, Stream purpose) {
  return splitmix64(splitmix64(splitmix64(base) ^ replication) ^
                    static_cast<std::uint64_t>(purpose));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t replication, Stream purpose) {
  return Rng(derive_seed(base, replication, purpose));
}

}  // namespace stane
