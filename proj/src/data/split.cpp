#include "msd/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msd/util/rng.hpp"

namespace msd::data {

Splits split_dataset(std::uint32_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("split: ratios must sum to 1");
    for (const double r : ratios) {
        if (r < 0.0) throw DataError("split: negative ratio");
    }

    std::array<std::uint32_t, 3> counts{};
    std::array<double, 3> frac{};
    std::uint32_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = ratios[static_cast<std::size_t>(i)] * n;
        counts[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(std::floor(exact + 1e-9));
        frac[static_cast<std::size_t>(i)] = exact - counts[static_cast<std::size_t>(i)];
        assigned += counts[static_cast<std::size_t>(i)];
    }
    // Largest remainder, ties to the lower index.
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (frac[static_cast<std::size_t>(i)] > frac[static_cast<std::size_t>(best)] + 1e-12) best = i;
        }
        ++counts[static_cast<std::size_t>(best)];
        frac[static_cast<std::size_t>(best)] = -1.0;
        ++assigned;
    }
    for (const auto c : counts) {
        if (c == 0) throw DataError("split: a split would be empty");
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    msd::rng::Xoshiro256ss rng(seed);
    for (std::uint32_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::uint32_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }

    Splits s;
    s.train.assign(order.begin(), order.begin() + counts[0]);
    s.val.assign(order.begin() + counts[0], order.begin() + counts[0] + counts[1]);
    s.test.assign(order.begin() + counts[0] + counts[1], order.end());
    return s;
}

} // namespace msd::data
