#pragma once

#include <cstdint>

#include "msd/core/tensor.hpp"
#include "msd/data/dataset.hpp"
#include "msd/data/factors.hpp"

// Shapes2D-16: 8-frame 3x16x16 clips of a hard-edged glyph on a toroidal
// grid. Factors (declaration order): color (static, 4), shape (static, 3),
// start cell (static, 9), motion (dynamic, 6), speed (dynamic, 2).
//
// Motion patterns displace the glyph by at most 2 cells per axis so that the
// start anchor stays identifiable from any single frame, and speed carves a
// one-pixel notch at a speed-dependent cell so that every configuration
// renders a distinct tensor even when motion == none.

namespace msd::data::shapes2d {

constexpr int kGrid = 16;
constexpr int kFrames = 8;
constexpr int kChannels = 3;
constexpr int kGlyph = 6;

std::vector<FactorSpec> factor_specs();

// [T, 3, 16, 16] in [0,1]; bitwise deterministic.
core::Tensor render(const Config& config);

// Single frame [3, 16, 16] at time t.
core::Tensor render_frame(const Config& config, int t);

// Full-state-space dataset (N = 1296, state-space order). The seed drives
// only the split shuffle; renders carry no randomness.
Dataset generate(std::uint64_t seed, double train_ratio = 0.70, double val_ratio = 0.15,
                 double test_ratio = 0.15);

} // namespace msd::data::shapes2d
