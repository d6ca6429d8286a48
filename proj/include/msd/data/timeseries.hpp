#pragma once

#include <cstdint>

#include "msd/core/tensor.hpp"
#include "msd/data/dataset.hpp"
#include "msd/data/factors.hpp"

// ts24: 24-step, 6-channel series. Factors (declaration order): regime
// (static, 4 amplitude levels), season (static, 4 phase quarters), station
// (static, 5 per-channel offset profiles), slope (dynamic, 3 trend slopes),
// freq (dynamic, 3 oscillation frequencies in whole cycles per sequence).
//
// channel c at step t:
//   offset(station, c) + amp(regime) * sin(2pi (freq t / T + season/4))
//   + slope * t / T + noise_scale * u(seed, regime, season, slope, freq, c, t)
// with u in [-1, 1). The sine is evaluated from a hard-coded quarter-wave
// table (arguments are always multiples of 2pi/96), so renders are bit-exact
// across platforms. The noise key deliberately excludes station: configs
// differing only in station differ by a constant per-channel offset.

namespace msd::data::ts24 {

constexpr int kSteps = 24;
constexpr int kChannelCount = 6;
constexpr double kDefaultNoiseScale = 0.05;

std::vector<FactorSpec> factor_specs();

// sin(2 pi k / 96) for integer k.
double sin_q96(int k);

core::Tensor render(const Config& config, std::uint64_t seed, double noise_scale);

Dataset generate(std::uint64_t seed, double noise_scale = kDefaultNoiseScale, double train_ratio = 0.70,
                 double val_ratio = 0.15, double test_ratio = 0.15);

} // namespace msd::data::ts24
