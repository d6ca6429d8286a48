#pragma once

#include <array>
#include <cstdint>

#include "msd/data/dataset.hpp"

namespace msd::data {

// Seeded Fisher-Yates shuffle of [0, n) then a contiguous cut into
// train/val/test. Counts use the largest-remainder rule so exact ratios come
// out exact; any empty split is an error.
Splits split_dataset(std::uint32_t n, const std::array<double, 3>& ratios, std::uint64_t seed);

} // namespace msd::data
