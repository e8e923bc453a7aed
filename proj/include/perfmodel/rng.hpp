#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace perfmodel::rng {

// All randomness in the library flows through std::mt19937_64 plus the
// helpers below. mt19937_64 output is fully specified by the standard and
// the helpers avoid <random> distributions (whose output is
// implementation-defined), so a fixed seed yields the same stream on every
// platform with IEEE-754 doubles.
//
// Draw accounting: unit/uniform consume one engine output, pick consumes
// one output per rejection round, gaussian consumes exactly two.

using Engine = std::mt19937_64;

// Uniform double in [0, 1), 53 random mantissa bits.
inline double unit(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
    return lo + unit(eng) * (hi - lo);
}

// Uniform index in [0, n). Rejection sampling, so the result is exactly
// uniform for every n.
inline std::uint64_t pick(Engine& eng, std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n; // 2^64 mod n
    std::uint64_t v = eng();
    while (v < reject_below) {
        v = eng();
    }
    return v % n;
}

// Standard normal via Box-Muller. No caching of the second deviate: the
// stream position after a call never depends on call history.
inline double gaussian(Engine& eng) {
    const double u1 = 1.0 - unit(eng); // (0, 1]
    const double u2 = unit(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace perfmodel::rng
