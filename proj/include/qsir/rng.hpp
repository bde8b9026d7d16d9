#pragma once

#include <cstdint>
#include <random>

namespace qsir {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for an independent stream identified by (seed, a, b, c). The result
/// depends only on its arguments, never on the order streams are requested.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

} // namespace qsir
