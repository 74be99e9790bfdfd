#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace lfpp {

/// Deterministic random source keyed by (seed, stream).
///
/// Distinct (seed, stream) pairs give statistically independent draw
/// sequences; the same pair reproduces the exact same sequence on every
/// run and under any thread schedule (each parallel task owns its own
/// stream, streams are never shared). All variates are derived from the
/// raw mt19937_64 output, whose sequence is fixed by the standard, so
/// output does not depend on the standard library's distribution
/// implementations.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix_key(seed, stream)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Exponential variate with the given rate (mean 1/rate).
    double exponential(double rate) {
        return -std::log(1.0 - uniform()) / rate;
    }

    /// Unbiased integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// splitmix64 step; also used to derive child seeds from a parent key.
    static std::uint64_t split_mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
        return split_mix(split_mix(seed) ^ split_mix(stream * 0xD1B54A32D192ED03ULL + 1));
    }

private:
    std::mt19937_64 engine_;
};

inline RandomSource seeded_rng(std::uint64_t seed, std::uint64_t stream) {
    return RandomSource(seed, stream);
}

}  // namespace lfpp
