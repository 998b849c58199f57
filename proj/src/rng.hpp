#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace darkscan::detail {

// Uniform integer in [0, bound) by rejection. std::uniform_int_distribution
// is implementation-defined, which would make seeded results differ
// between standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

template <class T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace darkscan::detail
