#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace eposim {

/// @brief SplitMix64: the fixed-increment splittable generator of
/// Steele/Lea/Flood as published by Vigna. 64 bits of state, passes
/// BigCrush, and — crucially here — cheap to derive independent
/// substreams from, which keeps every (onu, class) source reproducible
/// regardless of how many other sources a scenario instantiates.
class SplitMix64 {
    std::uint64_t state_;

public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] (small ranges only; modulo bias is
    /// negligible for the ranges used here).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

/// SplitMix64 finalizer as a standalone hash step.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// @brief Derive the seed of an independent substream from a scenario seed
/// and two stream keys. Documented scheme: nested SplitMix64 finalizers,
/// so substream identity depends only on (seed, k1, k2).
constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t k1,
                                           std::uint64_t k2 = 0) {
    return mix64(seed ^ mix64(k1 ^ mix64(k2 ^ 0x5851F42D4C957F2DULL)));
}

/// FNV-1a over a byte string; used for value-keyed sweep seeds and trace hashes.
constexpr std::uint64_t fnv1a(const char* data, std::size_t len,
                              std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xCBF29CE484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

} // namespace eposim
