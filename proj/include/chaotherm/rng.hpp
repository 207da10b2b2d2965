#pragma once

#include <cstdint>
#include <random>

namespace chaotherm {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of ensemble realization `index`.
constexpr std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(0x5851f42d4c957f2dULL * (index + 1)));
}

// Stream for realization `index` under `master`. Depends only on the pair,
// never on which worker draws it.
inline Rng stream(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0) {
    std::uint64_t s = mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL * (salt + 1)));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(salt)};
    return Rng(seq);
}

}  // namespace chaotherm
