#pragma once

#include <cstdint>
#include <random>

namespace hsheat {

// splitmix64 finalizer; used to derive independent per-path seeds from a
// base seed so parallel workers get decorrelated streams.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(mix_seed(base_seed) ^ stream));
}

}  // namespace hsheat
