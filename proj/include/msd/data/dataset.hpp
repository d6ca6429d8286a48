#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "msd/core/tensor.hpp"
#include "msd/data/factors.hpp"

namespace msd::data {

struct Splits {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> val;
    std::vector<std::uint32_t> test;
};

struct DatasetManifest {
    std::string name;
    std::vector<FactorSpec> factors;
    std::uint32_t n = 0;                 // sample count
    std::uint32_t t = 0;                 // sequence length
    std::vector<std::int64_t> step_shape; // per-step payload shape (o may be multi-axis)
    Splits splits;
    std::string dtype = "f32";
    std::string checksum; // over data.bin then labels.bin
    nlohmann::json generator; // generator identity + parameters (seed, noise, ...)

    std::int64_t step_elems() const {
        std::int64_t o = 1;
        for (const auto d : step_shape) o *= d;
        return o;
    }
    std::size_t factor_count() const { return factors.size(); }

    bool is_video() const { return step_shape.size() >= 2; }

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);

    // Structural invariants: unique factor names, cardinalities >= 2,
    // splits disjoint subsets of [0, n).
    void validate() const;
};

struct Dataset {
    DatasetManifest manifest;
    core::Tensor data;                 // [N, T, step...]
    std::vector<std::uint32_t> labels; // N x k row-major

    // Copy of sample i as a [T, step...] tensor.
    core::Tensor sample(std::uint32_t i) const;
    std::uint32_t label(std::uint32_t sample, std::size_t factor) const {
        return labels[sample * manifest.factor_count() + factor];
    }

    void validate() const;
};

} // namespace msd::data
