#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "msd/data/container.hpp"
#include "msd/data/shapes2d.hpp"
#include "msd/data/split.hpp"
#include "msd/data/timeseries.hpp"
#include "msd/util/json_util.hpp"
#include "msd/util/rng.hpp"

using namespace msd::data;

namespace {

std::string temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("msd_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::uint64_t tensor_hash(const float* p, std::int64_t n) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(p);
    for (std::int64_t i = 0; i < n * 4; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

TEST_CASE("build_state_space sizes and ordering") {
    std::vector<FactorSpec> fs = {
        {"a", FactorKind::Static, {"x", "y", "z"}},
        {"b", FactorKind::Static, {"p", "q"}},
        {"m", FactorKind::Dynamic, {"u", "v"}},
    };
    auto space = build_state_space(fs);
    CHECK(space.size() == 12);
    CHECK(space[0] == Config{0, 0, 0});
    CHECK(space[1] == Config{0, 0, 1}); // last factor varies fastest
    CHECK(space[11] == Config{2, 1, 1});
    for (std::size_t i = 0; i < space.size(); ++i) CHECK(state_index(fs, space[i]) == i);

    CHECK(build_state_space({{"only", FactorKind::Static, {"one"}}}).size() == 1);
    CHECK_THROWS_AS(build_state_space({}), msd::DataError);
}

TEST_CASE("shapes2d16 state space has 1296 configurations") {
    auto space = build_state_space(shapes2d::factor_specs());
    CHECK(space.size() == 1296);
}

TEST_CASE("shapes2d render: none motion is constant, determinism, distinctness") {
    auto space = build_state_space(shapes2d::factor_specs());

    // motion=none -> all frames bitwise identical.
    Config cfg{1, 2, 4, 5, 0};
    auto t = shapes2d::render(cfg);
    const std::int64_t per = 3 * 16 * 16;
    for (int f = 1; f < shapes2d::kFrames; ++f)
        for (std::int64_t i = 0; i < per; ++i) CHECK(t.data()[f * per + i] == t.data()[i]);

    // Determinism: bitwise equal renders.
    auto t2 = shapes2d::render(cfg);
    CHECK(std::memcmp(t.data(), t2.data(), static_cast<std::size_t>(t.numel()) * 4) == 0);

    // All 1296 renders pairwise distinct (hash then exact compare on collision).
    std::map<std::uint64_t, std::vector<std::size_t>> buckets;
    std::vector<msd::core::Tensor> renders;
    renders.reserve(space.size());
    for (const auto& c : space) renders.push_back(shapes2d::render(c));
    for (std::size_t i = 0; i < renders.size(); ++i) {
        buckets[tensor_hash(renders[i].data(), renders[i].numel())].push_back(i);
    }
    for (const auto& [h, idxs] : buckets) {
        for (std::size_t a = 0; a < idxs.size(); ++a)
            for (std::size_t b = a + 1; b < idxs.size(); ++b) {
                CHECK_MESSAGE(std::memcmp(renders[idxs[a]].data(), renders[idxs[b]].data(),
                                          static_cast<std::size_t>(renders[idxs[a]].numel()) * 4) != 0,
                              "states ", idxs[a], " and ", idxs[b], " render identically");
            }
    }

    // Frame pixels always in [0,1].
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        CHECK(t.data()[i] >= 0.0f);
        CHECK(t.data()[i] <= 1.0f);
    }
}

TEST_CASE("shapes2d: every factor-value pair occurs in some sample") {
    auto ds = shapes2d::generate(7);
    for (std::size_t f = 0; f < ds.manifest.factor_count(); ++f) {
        std::set<std::uint32_t> seen;
        for (std::uint32_t i = 0; i < ds.manifest.n; ++i) seen.insert(ds.label(i, f));
        CHECK(seen.size() == ds.manifest.factors[f].cardinality());
    }
}

TEST_CASE("ts24: station difference is a constant per-channel offset") {
    const std::uint64_t seed = 99;
    Config a{2, 1, 0, 2, 1};
    Config b{2, 1, 3, 2, 1}; // differs only in station
    auto ta = ts24::render(a, seed, 0.03);
    auto tb = ts24::render(b, seed, 0.03);
    for (int c = 0; c < ts24::kChannelCount; ++c) {
        const float d0 = tb.data()[c] - ta.data()[c];
        for (int t = 1; t < ts24::kSteps; ++t) {
            const float dt = tb.data()[t * ts24::kChannelCount + c] - ta.data()[t * ts24::kChannelCount + c];
            CHECK(dt == doctest::Approx(d0).epsilon(1e-6));
        }
    }
}

TEST_CASE("ts24: zero slope/amp/noise leaves station offsets") {
    // regime has no zero-amplitude level by design (configs must stay
    // distinguishable), so check against the analytic formula instead:
    // slope=flat, noise=0 -> series minus wave equals offsets exactly.
    Config cfg{0, 0, 1, 1, 0};
    auto t = ts24::render(cfg, 5, 0.0);
    for (int step = 0; step < ts24::kSteps; ++step) {
        const double wave = 0.5 * ts24::sin_q96(4 * step);
        for (int c = 0; c < ts24::kChannelCount; ++c) {
            const double offset = std::vector<double>{-0.5, -0.3, -0.1, 0.1, 0.3, 0.5}[c];
            CHECK(t.data()[step * ts24::kChannelCount + c] ==
                  doctest::Approx(offset + wave).epsilon(1e-6));
        }
    }
}

TEST_CASE("ts24: sine mean over whole periods vanishes") {
    for (std::uint32_t regime = 0; regime < 4; ++regime)
        for (std::uint32_t season = 0; season < 4; ++season)
            for (std::uint32_t freq = 0; freq < 3; ++freq) {
                Config cfg{regime, season, 2, 1, freq}; // slope flat
                auto t = ts24::render(cfg, 11, 0.0);
                for (int c = 0; c < ts24::kChannelCount; ++c) {
                    double mean = 0.0;
                    for (int step = 0; step < ts24::kSteps; ++step)
                        mean += t.data()[step * ts24::kChannelCount + c];
                    mean /= ts24::kSteps;
                    const double offset = std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}[c];
                    CHECK(std::abs(mean - offset) < 1e-6);
                }
            }
}

TEST_CASE("ts24 dataset: 720 configurations, deterministic") {
    auto a = ts24::generate(3);
    auto b = ts24::generate(3);
    CHECK(a.manifest.n == 720);
    CHECK(std::memcmp(a.data.data(), b.data.data(), static_cast<std::size_t>(a.data.numel()) * 4) == 0);
    CHECK(a.labels == b.labels);
    CHECK(a.manifest.splits.train == b.manifest.splits.train);
}

TEST_CASE("split_dataset: exact ratios, determinism, partition") {
    auto s = split_dataset(1200, {0.70, 0.15, 0.15}, 42);
    CHECK(s.train.size() == 840);
    CHECK(s.val.size() == 180);
    CHECK(s.test.size() == 180);

    auto s2 = split_dataset(1200, {0.70, 0.15, 0.15}, 42);
    CHECK(s.train == s2.train);
    CHECK(s.val == s2.val);
    CHECK(s.test == s2.test);

    std::set<std::uint32_t> all;
    for (const auto* sp : {&s.train, &s.val, &s.test})
        for (auto v : *sp) CHECK(all.insert(v).second);
    CHECK(all.size() == 1200);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 1199);

    CHECK_THROWS_AS(split_dataset(10, {0.5, 0.5, 0.5}, 1), msd::DataError);
    CHECK_THROWS_AS(split_dataset(3, {0.98, 0.01, 0.01}, 1), msd::DataError); // empty split
}

TEST_CASE("container roundtrip is bitwise lossless") {
    auto dir = temp_dir("container");
    auto ds = ts24::generate(17);
    write_container(ds, dir);
    auto back = read_container(dir);
    CHECK(back.manifest.n == ds.manifest.n);
    CHECK(back.manifest.checksum.substr(0, 8) == "fnv1a64:");
    CHECK(std::memcmp(back.data.data(), ds.data.data(), static_cast<std::size_t>(ds.data.numel()) * 4) == 0);
    CHECK(back.labels == ds.labels);
    CHECK(back.manifest.splits.train == ds.manifest.splits.train);
    CHECK(back.manifest.generator.at("noise_scale").get<double>() ==
          ds.manifest.generator.at("noise_scale").get<double>());
}

TEST_CASE("container detects corruption, truncation and bad manifests") {
    auto dir = temp_dir("corrupt");
    auto ds = ts24::generate(23);
    write_container(ds, dir);

    // Flip one byte in data.bin.
    {
        std::fstream f(dir + "/data.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(100);
        char c;
        f.seekg(100);
        f.read(&c, 1);
        c = static_cast<char>(c ^ 0x40);
        f.seekp(100);
        f.write(&c, 1);
    }
    CHECK_THROWS_AS(read_container(dir), msd::DataError);

    // Truncated file.
    write_container(ds, dir);
    std::filesystem::resize_file(dir + "/data.bin", 1000);
    CHECK_THROWS_AS(read_container(dir), msd::DataError);

    // Unknown manifest version.
    write_container(ds, dir);
    {
        auto j = msd::util::load_json_file(dir + "/manifest.json");
        j["format_version"] = 99;
        msd::util::write_file(dir + "/manifest.json", j.dump(2));
    }
    CHECK_THROWS_AS(read_container(dir), msd::DataError);

    // Manifest factor count inconsistent with labels.bin.
    write_container(ds, dir);
    {
        auto j = msd::util::load_json_file(dir + "/manifest.json");
        j["factors"].erase(4);
        msd::util::write_file(dir + "/manifest.json", j.dump(2));
    }
    CHECK_THROWS_AS(read_container(dir), msd::DataError);
}

TEST_CASE("container rejects datasets violating manifest invariants") {
    auto ds = ts24::generate(29);
    ds.labels[3] = 1000; // out-of-range label
    CHECK_THROWS_AS(ds.validate(), msd::DataError);
}
