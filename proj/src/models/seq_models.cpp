#include "msd/models/seq_models.hpp"

#include "msd/models/losses.hpp"

namespace msd::models {

namespace {

core::Tensor rows_view(const core::Tensor& x, std::int64_t o) {
    // [T, step...] (or stacked [N*T, step...]) -> [rows, o]
    return x.reshape({x.numel() / o, o});
}

} // namespace

// ---------------------------------------------------------------------------
// SeqAe
// ---------------------------------------------------------------------------

SeqAe::SeqAe(CoderGeometry geom, int latent_dim, std::vector<int> hidden_dims, float sparsity_weight,
             std::string kind_name)
    : geom_(std::move(geom)),
      latent_dim_(latent_dim),
      hidden_dims_(std::move(hidden_dims)),
      sparsity_weight_(sparsity_weight),
      kind_name_(std::move(kind_name)) {
    const int o = static_cast<int>(geom_.step_elems());
    enc_spec_ = MlpSpec{"enc", o, hidden_dims_, latent_dim_};
    std::vector<int> rev(hidden_dims_.rbegin(), hidden_dims_.rend());
    dec_spec_ = MlpSpec{"dec", latent_dim_, rev, o};
}

LatentInfo SeqAe::latent_info() const {
    return LatentInfo{latent_dim_, std::vector<ChannelRole>(static_cast<std::size_t>(latent_dim_),
                                                            ChannelRole::Untyped)};
}

core::Tensor SeqAe::encode(const core::Tensor& x) const {
    return mlp_apply(params_, enc_spec_, rows_view(x, geom_.step_elems()));
}

core::Tensor SeqAe::decode(const core::Tensor& z) const {
    core::Tensor out = mlp_apply(params_, dec_spec_, z);
    std::vector<std::int64_t> shape{z.dim(0)};
    shape.insert(shape.end(), geom_.step_shape.begin(), geom_.step_shape.end());
    return out.reshape(std::move(shape));
}

void SeqAe::init_params(std::uint64_t seed) {
    msd::rng::Xoshiro256ss rng(seed);
    mlp_init(params_, enc_spec_, rng);
    mlp_init(params_, dec_spec_, rng);
}

TrainableModel::LossResult SeqAe::build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                                             std::uint64_t step_seed) {
    (void)n;
    (void)step_seed;
    auto x = tape.input(rows_view(batch_rows, geom_.step_elems()));
    auto z = mlp_forward(tape, params_, enc_spec_, x);
    auto recon = mlp_forward(tape, params_, dec_spec_, z);
    auto rec = reconstruction_mse(tape, recon, x);
    if (sparsity_weight_ > 0.0f) {
        auto loss = sparse_ae_loss(tape, rec, z, sparsity_weight_);
        return LossResult{loss,
                          {{"loss", tape.value(loss).item()},
                           {"recon", tape.value(rec).item()},
                           {"sparsity", (tape.value(loss).item() - tape.value(rec).item())}}};
    }
    return LossResult{rec, {{"loss", tape.value(rec).item()}, {"recon", tape.value(rec).item()}}};
}

nlohmann::json SeqAe::config_json() const {
    nlohmann::json j{{"latent_dim", latent_dim_}, {"hidden_dims", hidden_dims_}};
    if (sparsity_weight_ > 0.0f) j["sparsity_weight"] = sparsity_weight_;
    return j;
}

// ---------------------------------------------------------------------------
// SeqVae
// ---------------------------------------------------------------------------

SeqVae::SeqVae(CoderGeometry geom, int latent_dim, std::vector<int> hidden_dims, float beta,
               std::string kind_name)
    : geom_(std::move(geom)),
      latent_dim_(latent_dim),
      hidden_dims_(std::move(hidden_dims)),
      beta_(beta),
      kind_name_(std::move(kind_name)) {
    if (beta_ < 0.0f) throw ConfigError("vae: beta must be >= 0");
    const int o = static_cast<int>(geom_.step_elems());
    enc_spec_ = MlpSpec{"enc", o, hidden_dims_, 2 * latent_dim_};
    std::vector<int> rev(hidden_dims_.rbegin(), hidden_dims_.rend());
    dec_spec_ = MlpSpec{"dec", latent_dim_, rev, o};
}

LatentInfo SeqVae::latent_info() const {
    return LatentInfo{latent_dim_, std::vector<ChannelRole>(static_cast<std::size_t>(latent_dim_),
                                                            ChannelRole::Untyped)};
}

core::Tensor SeqVae::encode(const core::Tensor& x) const {
    core::Tensor stats = mlp_apply(params_, enc_spec_, rows_view(x, geom_.step_elems()));
    return core::ops::slice_cols(stats, 0, latent_dim_);
}

core::Tensor SeqVae::decode(const core::Tensor& z) const {
    core::Tensor out = mlp_apply(params_, dec_spec_, z);
    std::vector<std::int64_t> shape{z.dim(0)};
    shape.insert(shape.end(), geom_.step_shape.begin(), geom_.step_shape.end());
    return out.reshape(std::move(shape));
}

void SeqVae::init_params(std::uint64_t seed) {
    msd::rng::Xoshiro256ss rng(seed);
    mlp_init(params_, enc_spec_, rng);
    mlp_init(params_, dec_spec_, rng);
}

TrainableModel::LossResult SeqVae::build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                                              std::uint64_t step_seed) {
    auto x = tape.input(rows_view(batch_rows, geom_.step_elems()));
    auto stats = mlp_forward(tape, params_, enc_spec_, x);
    auto mu = tape.slice_cols(stats, 0, latent_dim_);
    auto logvar = tape.slice_cols(stats, latent_dim_, 2 * latent_dim_);

    // Reparameterization with a per-step seeded draw.
    const auto& mu_val = tape.value(mu);
    msd::rng::Xoshiro256ss rng(step_seed);
    std::vector<float> eps(static_cast<std::size_t>(mu_val.numel()));
    for (auto& v : eps) v = static_cast<float>(rng.normal());
    auto epsv = tape.input(core::Tensor(mu_val.shape(), std::move(eps)));
    auto std_half = tape.exp_op(tape.scale(logvar, 0.5f));
    auto z = tape.add(mu, tape.mul(std_half, epsv));

    auto recon = mlp_forward(tape, params_, dec_spec_, z);
    auto rec = reconstruction_mse(tape, recon, x);
    auto kl = gaussian_kl(tape, mu, logvar, n);
    auto loss = beta_vae_loss(tape, rec, kl, beta_);
    return LossResult{loss,
                      {{"loss", tape.value(loss).item()},
                       {"recon", tape.value(rec).item()},
                       {"kl", tape.value(kl).item()}}};
}

nlohmann::json SeqVae::config_json() const {
    nlohmann::json j{{"latent_dim", latent_dim_}, {"hidden_dims", hidden_dims_}};
    if (kind_name_ == "beta_vae") j["beta"] = beta_;
    return j;
}

} // namespace msd::models
