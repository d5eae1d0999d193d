#pragma once

#include <cstdint>
#include <random>

namespace bdd {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream, derived from the root seed and a counter.
/// Streams are addressed by (purpose, index) so that e.g. replication 7 and
/// grid point 7 never share a generator.
constexpr std::uint64_t stream_seed(std::uint64_t root, std::uint64_t purpose,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(root ^ splitmix64(purpose)) + index);
}

namespace stream {
inline constexpr std::uint64_t replication = 1;
inline constexpr std::uint64_t band_draws = 2;
inline constexpr std::uint64_t simulation = 3;
}  // namespace stream

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t root, std::uint64_t purpose, std::uint64_t index) {
  return Engine(stream_seed(root, purpose, index));
}

}  // namespace bdd
