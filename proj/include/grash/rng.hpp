#pragma once

#include <cstdint>
#include <random>

namespace grash {

using Rng = std::mt19937_64;

// splitmix64; used to derive independent seed streams from a base seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return splitmix64(splitmix64(base ^ splitmix64(a)) ^ splitmix64(b + 0x517cc1b727220a95ULL));
}

}  // namespace grash
