#pragma once

#include <cstdint>
#include <vector>

#include "msd/models/contract.hpp"
#include "msd/models/mlp.hpp"

namespace msd::models {

struct CoderGeometry {
    int t = 0;                            // sequence length
    std::vector<std::int64_t> step_shape; // per-step payload shape

    std::int64_t step_elems() const {
        std::int64_t o = 1;
        for (const auto d : step_shape) o *= d;
        return o;
    }
};

// Plain sequential autoencoder: per-frame MLP encoder/decoder shared over
// time, MSE reconstruction.
class SeqAe : public TrainableModel {
public:
    SeqAe(CoderGeometry geom, int latent_dim, std::vector<int> hidden_dims, float sparsity_weight = 0.0f,
          std::string kind_name = "ae");

    std::string kind() const override { return kind_name_; }
    LatentInfo latent_info() const override;
    core::Tensor encode(const core::Tensor& x) const override;
    core::Tensor decode(const core::Tensor& z) const override;

    void init_params(std::uint64_t seed) override;
    LossResult build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                          std::uint64_t step_seed) override;
    nlohmann::json config_json() const override;

protected:
    CoderGeometry geom_;
    int latent_dim_;
    std::vector<int> hidden_dims_;
    float sparsity_weight_;
    std::string kind_name_;
    MlpSpec enc_spec_;
    MlpSpec dec_spec_;
};

// Variational variant; beta = 1 is the plain VAE, beta > 1 the beta-VAE.
class SeqVae : public TrainableModel {
public:
    SeqVae(CoderGeometry geom, int latent_dim, std::vector<int> hidden_dims, float beta,
           std::string kind_name);

    std::string kind() const override { return kind_name_; }
    LatentInfo latent_info() const override;
    core::Tensor encode(const core::Tensor& x) const override; // posterior mean
    core::Tensor decode(const core::Tensor& z) const override;
    bool is_variational() const override { return true; }

    void init_params(std::uint64_t seed) override;
    LossResult build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                          std::uint64_t step_seed) override;
    nlohmann::json config_json() const override;

    float beta() const { return beta_; }

private:
    CoderGeometry geom_;
    int latent_dim_;
    std::vector<int> hidden_dims_;
    float beta_;
    std::string kind_name_;
    MlpSpec enc_spec_; // outputs [mu || logvar]
    MlpSpec dec_spec_;
};

} // namespace msd::models
