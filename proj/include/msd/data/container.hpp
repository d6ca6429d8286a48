#pragma once

#include <string>

#include "msd/data/dataset.hpp"

// On-disk container: a directory holding manifest.json plus raw
// little-endian blobs data.bin (float32, row-major [N, T, step...]) and
// labels.bin (uint32, [N, k]). manifest.json records an fnv1a-64 checksum
// over data.bin followed by labels.bin; reads verify it.

namespace msd::data {

void write_container(const Dataset& dataset, const std::string& dir);

Dataset read_container(const std::string& dir);

} // namespace msd::data
