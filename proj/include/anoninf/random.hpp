#pragma once

#include <cstdint>
#include <random>

namespace anoninf {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

// Independent generator for item `index` of a job seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

// Uniform in [0,1) from a 64-bit hash, for order-independent subsampling.
inline double hash_unit(std::uint64_t seed, std::uint64_t index) {
    return double(splitmix64(seed ^ splitmix64(index)) >> 11) * 0x1.0p-53;
}

} // namespace anoninf
