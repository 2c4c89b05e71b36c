#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace recalleval {

/// Uniform draw from [0, n) by rejection, using only the engine's raw
/// 64-bit output. std::uniform_int_distribution is implementation-defined,
/// so sampling built on it would not reproduce across standard libraries;
/// this does, because mt19937_64 itself is fully specified.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

/// Fisher-Yates shuffle driven by uniform_below, reproducible everywhere.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[uniform_below(rng, i)]);
}

}  // namespace recalleval
