#pragma once

#include <optional>

#include "msd/linalg/koopman.hpp"
#include "msd/linalg/koopman_tape.hpp"
#include "msd/models/seq_models.hpp"

namespace msd::models {

// Structured Koopman disentanglement. The encoder produces a K-dim latent
// sequence; training adds a one-step linear-prediction term and a spectral
// penalty on the fitted Koopman matrix. The benchmark-facing latent space
// has 2K channels: static-projection coordinates followed by
// dynamic-projection coordinates; decode sums the two halves and runs the
// frame decoder.
//
// Skd fits one Koopman matrix per batch and stores the training-set
// decomposition in the checkpoint; SsmSkd refits per instance at encode time
// with a single static mode.
class KoopmanModelBase : public TrainableModel {
public:
    KoopmanModelBase(CoderGeometry geom, linalg::SpectralConfig spectral, std::vector<int> hidden_dims,
                     std::string kind_name);

    std::string kind() const override { return kind_name_; }
    LatentInfo latent_info() const override;
    core::Tensor decode(const core::Tensor& z) const override;

    void init_params(std::uint64_t seed) override;
    nlohmann::json config_json() const override;

    const linalg::SpectralConfig& spectral_config() const { return spectral_; }

    // Raw encoder latents [T, K] (before projection splitting).
    core::Tensor encode_raw(const core::Tensor& x) const;

    // Diagnostics from the last build_loss call.
    const linalg::KoopmanStepInfo& last_step_info() const { return last_info_; }

protected:
    // Splits Z into [static-projection || dynamic-projection] channels.
    core::Tensor project_split(const core::Tensor& z_raw, const linalg::KoopmanDecomposition& d) const;

    CoderGeometry geom_;
    linalg::SpectralConfig spectral_;
    std::vector<int> hidden_dims_;
    std::string kind_name_;
    MlpSpec enc_spec_;
    MlpSpec dec_spec_;
    linalg::KoopmanStepInfo last_info_;
};

class Skd : public KoopmanModelBase {
public:
    Skd(CoderGeometry geom, linalg::SpectralConfig spectral, std::vector<int> hidden_dims);

    core::Tensor encode(const core::Tensor& x) const override;
    LossResult build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                          std::uint64_t step_seed) override;

    // Fits the batch-level decomposition on the training split.
    void finalize(const std::vector<core::Tensor>& train_samples) override;

    nlohmann::json extra_state() const override;
    void load_extra_state(const nlohmann::json& j) override;

    const std::optional<linalg::KoopmanDecomposition>& decomposition() const { return decomposition_; }

private:
    std::optional<linalg::KoopmanDecomposition> decomposition_;
};

class SsmSkd : public KoopmanModelBase {
public:
    SsmSkd(CoderGeometry geom, linalg::SpectralConfig spectral, std::vector<int> hidden_dims);

    core::Tensor encode(const core::Tensor& x) const override;
    LossResult build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                          std::uint64_t step_seed) override;

    // Per-instance decomposition of an encoded latent sequence.
    linalg::KoopmanDecomposition instance_decomposition(const core::Tensor& z_raw) const;
};

} // namespace msd::models
