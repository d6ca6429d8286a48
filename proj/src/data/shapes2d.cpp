#include "msd/data/shapes2d.hpp"

#include <array>

#include "msd/data/split.hpp"

namespace msd::data::shapes2d {

namespace {

constexpr std::array<std::array<float, 3>, 4> kPalette = {{
    {1.0f, 0.0f, 0.0f}, // red
    {0.0f, 1.0f, 0.0f}, // green
    {0.0f, 0.0f, 1.0f}, // blue
    {1.0f, 1.0f, 0.0f}, // yellow
}};

// 6x6 glyph masks. All three cover cells (2,2) and (3,3), where the speed
// notch is carved.
constexpr std::array<std::array<const char*, kGlyph>, 3> kMasks = {{
    {"######", "######", "######", "######", "######", "######"}, // square
    {"..##..", ".####.", "######", "######", ".####.", "..##.."}, // diamond
    {"..##..", "..##..", ".####.", ".####.", "######", "######"}, // triangle
}};

struct Disp {
    int dr;
    int dc;
};

// Anchor of start cell c on the 3x3 grid of spawn points.
Disp anchor_of(std::uint32_t cell) {
    return Disp{1 + 5 * static_cast<int>(cell / 3), 1 + 5 * static_cast<int>(cell % 3)};
}

// Displacement of the glyph box at frame t; bounded by 2 cells per axis.
Disp displacement(std::uint32_t motion, int speed, int t) {
    const int osc = (t % 2) * speed;
    switch (motion) {
        case 0: return {0, -osc};          // left
        case 1: return {0, osc};           // right
        case 2: return {-osc, 0};          // up
        case 3: return {osc, 0};           // down
        case 4: {                          // orbit: small clockwise square
            static constexpr int pr[4] = {0, 0, 1, 1};
            static constexpr int pc[4] = {0, 1, 1, 0};
            return {pr[t % 4] * speed, pc[t % 4] * speed};
        }
        case 5: return {0, 0};             // none
        default: throw DataError("shapes2d: bad motion index");
    }
}

void render_frame_into(float* frame, const Config& cfg, int t) {
    const auto& color = kPalette[cfg[0]];
    const auto& mask = kMasks[cfg[1]];
    const Disp anchor = anchor_of(cfg[2]);
    const int speed = static_cast<int>(cfg[4]) + 1;
    const Disp d = displacement(cfg[3], speed, t);
    const int notch_r = cfg[4] == 0 ? 2 : 3;
    const int notch_c = notch_r;
    for (int mr = 0; mr < kGlyph; ++mr) {
        for (int mc = 0; mc < kGlyph; ++mc) {
            if (mask[mr][mc] != '#') continue;
            if (mr == notch_r && mc == notch_c) continue;
            const int r = ((anchor.dr + d.dr + mr) % kGrid + kGrid) % kGrid;
            const int c = ((anchor.dc + d.dc + mc) % kGrid + kGrid) % kGrid;
            for (int ch = 0; ch < kChannels; ++ch) frame[(ch * kGrid + r) * kGrid + c] = color[ch];
        }
    }
}

} // namespace

std::vector<FactorSpec> factor_specs() {
    return {
        {"color", FactorKind::Static, {"red", "green", "blue", "yellow"}},
        {"shape", FactorKind::Static, {"square", "diamond", "triangle"}},
        {"start_cell", FactorKind::Static,
         {"r0c0", "r0c1", "r0c2", "r1c0", "r1c1", "r1c2", "r2c0", "r2c1", "r2c2"}},
        {"motion", FactorKind::Dynamic, {"left", "right", "up", "down", "orbit", "none"}},
        {"speed", FactorKind::Dynamic, {"1", "2"}},
    };
}

core::Tensor render(const Config& config) {
    if (config.size() != 5) throw DataError("shapes2d: config needs 5 factors");
    const std::int64_t per_frame = kChannels * kGrid * kGrid;
    std::vector<float> buf(static_cast<std::size_t>(kFrames * per_frame), 0.0f);
    for (int t = 0; t < kFrames; ++t) render_frame_into(buf.data() + t * per_frame, config, t);
    return core::Tensor({kFrames, kChannels, kGrid, kGrid}, std::move(buf));
}

core::Tensor render_frame(const Config& config, int t) {
    std::vector<float> buf(static_cast<std::size_t>(kChannels) * kGrid * kGrid, 0.0f);
    render_frame_into(buf.data(), config, t);
    return core::Tensor({kChannels, kGrid, kGrid}, std::move(buf));
}

Dataset generate(std::uint64_t seed, double train_ratio, double val_ratio, double test_ratio) {
    Dataset ds;
    ds.manifest.name = "shapes2d16";
    ds.manifest.factors = factor_specs();
    ds.manifest.t = kFrames;
    ds.manifest.step_shape = {kChannels, kGrid, kGrid};
    ds.manifest.generator = {{"kind", "shapes2d16"}, {"seed", seed}};

    const auto space = build_state_space(ds.manifest.factors);
    ds.manifest.n = static_cast<std::uint32_t>(space.size());
    const std::int64_t per = static_cast<std::int64_t>(kFrames) * kChannels * kGrid * kGrid;
    std::vector<float> all(static_cast<std::size_t>(per) * space.size(), 0.0f);
    ds.labels.reserve(space.size() * 5);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const core::Tensor sample = render(space[i]);
        std::copy(sample.data(), sample.data() + per, all.begin() + static_cast<std::ptrdiff_t>(i) * per);
        for (const auto v : space[i]) ds.labels.push_back(v);
    }
    ds.data = core::Tensor({static_cast<std::int64_t>(space.size()), kFrames, kChannels, kGrid, kGrid},
                           std::move(all));
    ds.manifest.splits = split_dataset(ds.manifest.n, {train_ratio, val_ratio, test_ratio}, seed);
    ds.validate();
    return ds;
}

} // namespace msd::data::shapes2d
