#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "msd/core/tape.hpp"
#include "msd/core/tensor.hpp"

namespace msd::models {

enum class ChannelRole { Static, Dynamic, Untyped };

inline const char* to_string(ChannelRole r) {
    switch (r) {
        case ChannelRole::Static: return "static";
        case ChannelRole::Dynamic: return "dynamic";
        default: return "untyped";
    }
}

struct LatentInfo {
    int channels = 0;
    std::vector<ChannelRole> roles; // one per channel
};

// The benchmark-facing model contract: a per-step latent sequence with
// channel semantics, plus a fixed-length vector view of a sample. Swapping
// and sampling act on channels so the same index sets work for both views.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string kind() const = 0;
    virtual LatentInfo latent_info() const = 0;

    // [T, step...] -> [T, channels]
    virtual core::Tensor encode(const core::Tensor& x) const = 0;
    // [T, channels] -> [T, step...]
    virtual core::Tensor decode(const core::Tensor& z) const = 0;

    virtual bool is_variational() const { return false; }

    int latent_dim() const { return latent_info().channels; }

    // Fixed-length representation: per-channel time average by default, or
    // the flattened [T * channels] trajectory when flatten_latent_vector.
    std::vector<float> latent_vector(const core::Tensor& x) const;

    // Encoded training latents; donor pool for deterministic sampling.
    void set_latent_bank(std::vector<core::Tensor> bank) { latent_bank_ = std::move(bank); }
    const std::vector<core::Tensor>& latent_bank() const { return latent_bank_; }

    bool flatten_latent_vector = false;

private:
    std::vector<core::Tensor> latent_bank_;
};

// Exchanges the channels in `idx` between two latent sequences (or any two
// equal-shape [rows, channels] tensors). The empty set is the identity.
std::pair<core::Tensor, core::Tensor> swap_channels(const core::Tensor& za, const core::Tensor& zb,
                                                    const std::vector<int>& idx);

// Copy of `z` with the given channels replaced by `values` ([T, |channels|]).
core::Tensor set_channels(const core::Tensor& z, const std::vector<int>& channels,
                          const core::Tensor& values);

// Column block [T, |channels|] of z.
core::Tensor get_channels(const core::Tensor& z, const std::vector<int>& channels);

// New per-channel values for the given channel subset as a [T, |channels|]
// tensor. Variational models draw one standard normal per channel (held
// constant over time); deterministic models copy the channels' trajectories
// from a PRNG-chosen latent-bank entry.
core::Tensor sample_latent(const Model& model, const std::vector<int>& channels, std::uint64_t seed);

// Trainable extension: parameter store plus a tape-built loss.
class TrainableModel : public Model {
public:
    struct LossResult {
        core::Tape::Var loss;
        std::map<std::string, double> terms;
    };

    core::ParamStore& params() { return params_; }
    const core::ParamStore& params() const { return params_; }

    virtual void init_params(std::uint64_t seed) = 0;

    // batch_rows: frames stacked as [N*T, o].
    virtual LossResult build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                                  std::uint64_t step_seed) = 0;

    // Called once after training with the training-split samples (e.g. SKD
    // fits its batch-level decomposition here).
    virtual void finalize(const std::vector<core::Tensor>& train_samples) { (void)train_samples; }

    virtual nlohmann::json config_json() const = 0;
    virtual nlohmann::json extra_state() const { return nlohmann::json::object(); }
    virtual void load_extra_state(const nlohmann::json& j) { (void)j; }

protected:
    core::ParamStore params_;
};

} // namespace msd::models
