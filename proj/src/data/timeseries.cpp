#include "msd/data/timeseries.hpp"

#include <array>

#include "msd/data/split.hpp"
#include "msd/util/rng.hpp"

namespace msd::data::ts24 {

namespace {

// sin(2 pi k / 96), k = 0..24, as exact hex doubles; the rest by symmetry.
constexpr std::array<double, 25> kSinQuarter = {
    0x0.0p+0,               0x1.0be426d197a8bp-4,  0x1.0b5150f6da2d0p-3,  0x1.8f8b83c69a60ap-3,
    0x1.0907dc1930690p-2,   0x1.49276d5c7bb48p-2,  0x1.87de2a6aea963p-2,  0x1.c4e7538f866fbp-2,
    0x1.fffffffffffffp-2,   0x1.1c73b39ae68c8p-1,  0x1.37af93f9513eap-1,  0x1.5195c65137f0cp-1,
    0x1.6a09e667f3bccp-1,   0x1.80f125b1e8028p-1,  0x1.963268b572492p-1,  0x1.a9b66290ea1a2p-1,
    0x1.bb67ae8584caap-1,   0x1.cb32e76b1d0f5p-1,  0x1.d906bcf328d46p-1,  0x1.e4d406a38e9aap-1,
    0x1.ee8dd4748bf15p-1,   0x1.f6297cff75cb0p-1,  0x1.fb9ea92ec689bp-1,  0x1.fee75d62a9c46p-1,
    0x1.0000000000000p+0,
};

constexpr std::array<double, 4> kAmplitude = {0.5, 1.0, 1.5, 2.0};
constexpr std::array<double, 3> kSlope = {-1.0, 0.0, 1.0};
constexpr std::array<int, 3> kFreq = {1, 2, 3};

constexpr double kOffsets[5][kChannelCount] = {
    {-1.0, -0.8, -0.6, -0.4, -0.2, 0.0},
    {-0.5, -0.3, -0.1, 0.1, 0.3, 0.5},
    {0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
    {0.5, 0.3, 0.1, -0.1, -0.3, -0.5},
    {1.0, 0.8, 0.6, 0.4, 0.2, 0.0},
};

// Noise key chain; excludes station so that station only shifts offsets.
double noise_unit(std::uint64_t seed, const Config& cfg, int channel, int t) {
    using msd::rng::splitmix64_mix;
    std::uint64_t h = splitmix64_mix(seed ^ 0x6d73642d74733234ULL);
    h = splitmix64_mix(h ^ (cfg[0] + 1));
    h = splitmix64_mix(h ^ ((cfg[1] + 1) << 8));
    h = splitmix64_mix(h ^ ((cfg[3] + 1) << 16));
    h = splitmix64_mix(h ^ ((cfg[4] + 1) << 24));
    h = splitmix64_mix(h ^ (static_cast<std::uint64_t>(channel + 1) << 32));
    h = splitmix64_mix(h ^ (static_cast<std::uint64_t>(t + 1) << 40));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53; // [0,1)
    return 2.0 * (u - 0.5);
}

} // namespace

double sin_q96(int k) {
    int m = k % 96;
    if (m < 0) m += 96;
    if (m <= 24) return kSinQuarter[static_cast<std::size_t>(m)];
    if (m <= 48) return kSinQuarter[static_cast<std::size_t>(48 - m)];
    if (m <= 72) return -kSinQuarter[static_cast<std::size_t>(m - 48)];
    return -kSinQuarter[static_cast<std::size_t>(96 - m)];
}

std::vector<FactorSpec> factor_specs() {
    return {
        {"regime", FactorKind::Static, {"calm", "mild", "active", "stormy"}},
        {"season", FactorKind::Static, {"q0", "q1", "q2", "q3"}},
        {"station", FactorKind::Static, {"s0", "s1", "s2", "s3", "s4"}},
        {"slope", FactorKind::Dynamic, {"down", "flat", "up"}},
        {"freq", FactorKind::Dynamic, {"f1", "f2", "f3"}},
    };
}

core::Tensor render(const Config& cfg, std::uint64_t seed, double noise_scale) {
    if (cfg.size() != 5) throw DataError("ts24: config needs 5 factors");
    const double amp = kAmplitude[cfg[0]];
    const int phase_q = static_cast<int>(cfg[1]) * 24; // quarter turns in k/96 units
    const double* offsets = kOffsets[cfg[2]];
    const double slope = kSlope[cfg[3]];
    const int freq = kFreq[cfg[4]];
    std::vector<float> buf(static_cast<std::size_t>(kSteps) * kChannelCount);
    for (int t = 0; t < kSteps; ++t) {
        const double wave = amp * sin_q96(4 * freq * t + phase_q);
        const double trend = slope * static_cast<double>(t) / kSteps;
        for (int c = 0; c < kChannelCount; ++c) {
            const double noise = noise_scale != 0.0 ? noise_scale * noise_unit(seed, cfg, c, t) : 0.0;
            buf[static_cast<std::size_t>(t) * kChannelCount + c] =
                static_cast<float>(offsets[c] + wave + trend + noise);
        }
    }
    return core::Tensor({kSteps, kChannelCount}, std::move(buf));
}

Dataset generate(std::uint64_t seed, double noise_scale, double train_ratio, double val_ratio,
                 double test_ratio) {
    Dataset ds;
    ds.manifest.name = "ts24";
    ds.manifest.factors = factor_specs();
    ds.manifest.t = kSteps;
    ds.manifest.step_shape = {kChannelCount};
    ds.manifest.generator = {{"kind", "ts24"}, {"seed", seed}, {"noise_scale", noise_scale}};

    const auto space = build_state_space(ds.manifest.factors);
    ds.manifest.n = static_cast<std::uint32_t>(space.size());
    const std::int64_t per = static_cast<std::int64_t>(kSteps) * kChannelCount;
    std::vector<float> all(static_cast<std::size_t>(per) * space.size());
    ds.labels.reserve(space.size() * 5);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const core::Tensor sample = render(space[i], seed, noise_scale);
        std::copy(sample.data(), sample.data() + per, all.begin() + static_cast<std::ptrdiff_t>(i) * per);
        for (const auto v : space[i]) ds.labels.push_back(v);
    }
    ds.data = core::Tensor({static_cast<std::int64_t>(space.size()), kSteps, kChannelCount}, std::move(all));
    ds.manifest.splits = split_dataset(ds.manifest.n, {train_ratio, val_ratio, test_ratio}, seed);
    ds.validate();
    return ds;
}

} // namespace msd::data::ts24
