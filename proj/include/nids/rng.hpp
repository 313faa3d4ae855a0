#ifndef NIDS_RNG_HPP
#define NIDS_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace nids {

// std::shuffle and the std distributions are implementation-defined; these are
// not, so seeded output is identical across standard libraries and hosts.

inline std::uint64_t bounded_draw(std::mt19937_64& engine, std::uint64_t bound) {
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t value = 0;
    do {
        value = engine();
    } while (value >= limit);
    return value % bound;
}

inline double unit_draw(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

template <typename T>
void portable_shuffle(std::vector<T>& items, std::mt19937_64& engine) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded_draw(engine, i));
        std::swap(items[i - 1], items[j]);
    }
}

inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 engine(seed);
    portable_shuffle(order, engine);
    return order;
}

} // namespace nids

#endif // NIDS_RNG_HPP
