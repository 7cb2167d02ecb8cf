#pragma once

/** \file random.hpp
 *  \brief Seeded, implementation-independent random numbers.
 *
 * Standard library distributions are not specified bit-for-bit, so the
 * engine output is mapped to doubles and ranges by hand. Everything that
 * consumes randomness takes a seed derived from the master seed with
 * derive_seed(), so stages never share a stream.
 */

#include <cstdint>
#include <random>
#include <string_view>

namespace mmrfuse {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xCBF29CE484222325ULL) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

/** \brief Sub-seed for a named stage: FNV-1a(stage) mixed with the master seed.
 *
 * \p key distinguishes instances of the same stage (e.g. a cluster id).
 */
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::string_view key = {}) {
    std::uint64_t h = fnv1a(stage);
    h = fnv1a("/", h);
    h = fnv1a(key, h);
    return splitmix64(master ^ splitmix64(h));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling keeps the result unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mmrfuse
