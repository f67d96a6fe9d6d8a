#pragma once

#include <cstdint>
#include <random>

namespace slhvb {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive statistically independent seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Per-replication seed: base_seed XOR a fixed mixing of the replication index.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    return base_seed ^ mix64(index);
}

// Sub-stream seed within one replication (environment / policy / predictor).
inline std::uint64_t substream_seed(std::uint64_t episode_seed, std::uint64_t stream) {
    return mix64(episode_seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Uniform double in [0, 1) from the top 53 bits; portable across platforms.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

} // namespace slhvb
