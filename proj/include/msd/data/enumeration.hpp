#pragma once

#include <memory>

#include "msd/data/dataset.hpp"
#include "msd/data/factors.hpp"

// Exhaustive enumeration of a generator's state space with clean rendered
// outputs, reconstructed from a dataset manifest (same seed and noise
// parameters, so enumerated tensors match dataset tensors bit-exactly).
// Backs the oracle judge and the analytic ground-truth model.

namespace msd::data {

class StateEnumeration {
public:
    static std::shared_ptr<const StateEnumeration> build(const DatasetManifest& manifest);

    const std::vector<FactorSpec>& factors() const { return factors_; }
    const std::vector<Config>& configs() const { return configs_; }
    std::size_t size() const { return configs_.size(); }
    std::uint32_t t() const { return t_; }
    const std::vector<std::int64_t>& step_shape() const { return step_shape_; }
    std::int64_t state_elems() const { return state_elems_; }
    std::int64_t frame_elems() const { return frame_elems_; }

    // Pointer into the packed [S, T, step...] buffer.
    const float* state_data(std::size_t i) const { return states_.data() + static_cast<std::int64_t>(i) * state_elems_; }
    const float* frame_data(std::size_t i, std::uint32_t frame) const {
        return state_data(i) + static_cast<std::int64_t>(frame) * frame_elems_;
    }

    core::Tensor state_tensor(std::size_t i) const;

    // Deterministic render of an arbitrary configuration.
    core::Tensor render(const Config& config) const;

    // Smallest L2 distance between any two distinct enumerated states.
    double min_pairwise_distance() const;

private:
    std::vector<FactorSpec> factors_;
    std::vector<Config> configs_;
    core::Tensor states_;
    std::uint32_t t_ = 0;
    std::vector<std::int64_t> step_shape_;
    std::int64_t state_elems_ = 0;
    std::int64_t frame_elems_ = 0;
    std::string generator_kind_;
    std::uint64_t seed_ = 0;
    double noise_scale_ = 0.0;
};

} // namespace msd::data
