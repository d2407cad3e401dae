// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gascraft {

// Distributions are hand rolled on top of mt19937_64 so that sampled
// sequences are identical across standard library implementations.
inline std::uint64_t rng_u64(std::mt19937_64& rng) { return rng(); }

// Uniform integer in [lo, hi] via modulo rejection, exact for any span.
inline std::int64_t rng_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(rng());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double rng_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Gaussian via Box-Muller on rng_unit, deterministic across platforms.
inline double rng_normal(std::mt19937_64& rng) {
    double u1 = rng_unit(rng);
    while (u1 <= 0.0) u1 = rng_unit(rng);
    const double u2 = rng_unit(rng);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// FNV-1a, used for seed derivation and content hashing.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = fnv1a(tag);
    h ^= base + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

} // namespace gascraft
