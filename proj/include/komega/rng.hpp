#pragma once

#include <cmath>
#include <cstdint>

namespace komega::rng {

// 64-bit finalizer (splitmix64). Stateless: the word for any (seed, stream,
// counter) triple can be computed directly, so draws are reproducible and
// order-independent across threads.
inline std::uint64_t mix_bits(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent draw streams hanging off one master seed.
enum class Stream : std::uint64_t {
    omega_draw = 1,
    initial_condition = 2,
};

inline std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t counter) {
    std::uint64_t x = mix_bits(seed ^ 0x243f6a8885a308d3ull);
    x = mix_bits(x ^ static_cast<std::uint64_t>(stream) * 0x452821e638d01377ull);
    return mix_bits(x ^ counter);
}

// Map a 64-bit word to (0, 1), endpoints excluded: take the top 53 bits and
// centre each cell, giving values in [2^-54, 1 - 2^-54].
inline double uniform_open01(std::uint64_t word) {
    return (static_cast<double>(word >> 11) + 0.5) * 0x1p-53;
}

// Uniform draw strictly inside (lo, hi).
inline double uniform_open(std::uint64_t word, double lo, double hi) {
    double x = lo + uniform_open01(word) * (hi - lo);
    if (x <= lo) x = std::nextafter(lo, hi);
    if (x >= hi) x = std::nextafter(hi, lo);
    return x;
}

}  // namespace komega::rng
