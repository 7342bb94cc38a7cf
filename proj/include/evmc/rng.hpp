#pragma once

#include <cstdint>
#include <random>

namespace evmc {

// splitmix64; used to derive independent engine seeds from (seed, stream ids).
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0,
                         uint64_t c = 0) {
  uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (a + 0x100000001b3ULL));
  h = splitmix64(h ^ (b + 0xcbf29ce484222325ULL));
  h = splitmix64(h ^ c);
  return h;
}

/// Independent RNG stream for (seed, stream, substream). Streams handed to
/// different chains/systems never overlap in practice.
inline std::mt19937_64 make_engine(uint64_t seed, uint64_t stream = 0,
                                   uint64_t substream = 0) {
  return std::mt19937_64(mix_seed(seed, stream, substream));
}

}  // namespace evmc
