// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random streams. A stream is fully identified by
// (seed, stream_key); the same pair always yields the same sequence on every
// platform. mt19937_64 is specified bit-for-bit by the standard, and the
// uniform/gaussian transforms below avoid the implementation-defined
// std::*_distribution classes.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace semiot {

inline std::uint64_t splitmix64_next(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_key) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64_next(s);
    s ^= stream_key * 0xD1B54A32D192ED03ull;
    h ^= splitmix64_next(s);
    return h;
}

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_key)
        : engine_(derive_stream_seed(seed, stream_key)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; spare value cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace semiot
