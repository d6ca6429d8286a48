#include "msd/models/koopman_models.hpp"

#include "msd/linalg/koopman_tape.hpp"
#include "msd/models/losses.hpp"

namespace msd::models {

namespace {

linalg::Mat to_mat(const core::Tensor& z) {
    linalg::Mat m(static_cast<int>(z.dim(0)), static_cast<int>(z.dim(1)));
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = static_cast<double>(z.data()[i]);
    return m;
}

} // namespace

KoopmanModelBase::KoopmanModelBase(CoderGeometry geom, linalg::SpectralConfig spectral,
                                   std::vector<int> hidden_dims, std::string kind_name)
    : geom_(std::move(geom)),
      spectral_(spectral),
      hidden_dims_(std::move(hidden_dims)),
      kind_name_(std::move(kind_name)) {
    spectral_.validate();
    const int o = static_cast<int>(geom_.step_elems());
    enc_spec_ = MlpSpec{"enc", o, hidden_dims_, spectral_.k_dim};
    std::vector<int> rev(hidden_dims_.rbegin(), hidden_dims_.rend());
    dec_spec_ = MlpSpec{"dec", spectral_.k_dim, rev, o};
}

LatentInfo KoopmanModelBase::latent_info() const {
    const int k = spectral_.k_dim;
    LatentInfo info;
    info.channels = 2 * k;
    info.roles.assign(static_cast<std::size_t>(2 * k), ChannelRole::Dynamic);
    for (int i = 0; i < k; ++i) info.roles[static_cast<std::size_t>(i)] = ChannelRole::Static;
    return info;
}

core::Tensor KoopmanModelBase::encode_raw(const core::Tensor& x) const {
    return mlp_apply(params_, enc_spec_, x.reshape({x.numel() / geom_.step_elems(), geom_.step_elems()}));
}

core::Tensor KoopmanModelBase::decode(const core::Tensor& z) const {
    const int k = spectral_.k_dim;
    if (z.ndim() != 2 || z.dim(1) != 2 * k) throw NumericError("koopman decode: expected 2K channels");
    // Z = static part + dynamic part.
    const std::int64_t t = z.dim(0);
    std::vector<float> sum(static_cast<std::size_t>(t) * k);
    for (std::int64_t r = 0; r < t; ++r)
        for (int c = 0; c < k; ++c)
            sum[static_cast<std::size_t>(r * k + c)] = z.data()[r * 2 * k + c] + z.data()[r * 2 * k + k + c];
    core::Tensor out = mlp_apply(params_, dec_spec_, core::Tensor({t, k}, std::move(sum)));
    std::vector<std::int64_t> shape{t};
    shape.insert(shape.end(), geom_.step_shape.begin(), geom_.step_shape.end());
    return out.reshape(std::move(shape));
}

void KoopmanModelBase::init_params(std::uint64_t seed) {
    msd::rng::Xoshiro256ss rng(seed);
    mlp_init(params_, enc_spec_, rng);
    mlp_init(params_, dec_spec_, rng);
}

core::Tensor KoopmanModelBase::project_split(const core::Tensor& z_raw,
                                             const linalg::KoopmanDecomposition& d) const {
    const int k = spectral_.k_dim;
    if (d.ill_conditioned) {
        throw IllConditionedError(kind_name_ + ": eigenbasis condition " + std::to_string(d.cond) +
                                  " exceeds 1e12");
    }
    auto static_modes =
        linalg::close_mode_subset(d.eigenvalues, linalg::modes_with_label(d.mode_labels, linalg::ModeLabel::Static));
    std::vector<int> dynamic_modes;
    for (int i = 0; i < k; ++i) {
        if (std::find(static_modes.begin(), static_modes.end(), i) == static_modes.end()) {
            dynamic_modes.push_back(i);
        }
    }
    const linalg::Mat z = to_mat(z_raw);
    const linalg::Mat zs = linalg::project_modes(z, d.eigenvalues, d.v, d.v_inv, static_modes);
    linalg::Mat zd;
    if (dynamic_modes.empty()) {
        zd = linalg::Mat(z.rows, z.cols);
    } else {
        zd = linalg::project_modes(z, d.eigenvalues, d.v, d.v_inv, dynamic_modes);
    }
    const std::int64_t t = z_raw.dim(0);
    std::vector<float> out(static_cast<std::size_t>(t) * 2 * k);
    for (std::int64_t r = 0; r < t; ++r)
        for (int c = 0; c < k; ++c) {
            out[static_cast<std::size_t>(r * 2 * k + c)] = static_cast<float>(zs.at(static_cast<int>(r), c));
            out[static_cast<std::size_t>(r * 2 * k + k + c)] = static_cast<float>(zd.at(static_cast<int>(r), c));
        }
    return core::Tensor({t, 2 * k}, std::move(out));
}

nlohmann::json KoopmanModelBase::config_json() const {
    return nlohmann::json{
        {"k_dim", spectral_.k_dim},
        {"hidden_dims", hidden_dims_},
        {"static_size", spectral_.static_size},
        {"static_mode", spectral_.static_mode == linalg::StaticMode::Ball ? "ball" : "norm"},
        {"dynamic_thresh", spectral_.dynamic_thresh},
        {"w_rec", spectral_.w_rec},
        {"w_pred", spectral_.w_pred},
        {"w_eigs", spectral_.w_eigs},
    };
}

// ---------------------------------------------------------------------------
// Skd (batch-level Koopman)
// ---------------------------------------------------------------------------

Skd::Skd(CoderGeometry geom, linalg::SpectralConfig spectral, std::vector<int> hidden_dims)
    : KoopmanModelBase(std::move(geom), spectral, std::move(hidden_dims), "skd") {}

core::Tensor Skd::encode(const core::Tensor& x) const {
    if (!decomposition_) {
        throw NumericError("skd: no stored Koopman decomposition; train or load a checkpoint first");
    }
    return project_split(encode_raw(x), *decomposition_);
}

TrainableModel::LossResult Skd::build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                                           std::uint64_t step_seed) {
    (void)step_seed;
    const std::int64_t o = geom_.step_elems();
    auto x = tape.input(batch_rows.reshape({batch_rows.numel() / o, o}));
    auto z = mlp_forward(tape, params_, enc_spec_, x);
    auto recon = mlp_forward(tape, params_, dec_spec_, z);
    auto rec = reconstruction_mse(tape, recon, x);

    last_info_ = linalg::KoopmanStepInfo{};
    auto pred = linalg::koopman_pred_loss(tape, z, n, geom_.t, spectral_.k_dim, false, &last_info_);
    auto spec = linalg::koopman_spectral_loss(tape, z, n, geom_.t, spectral_.k_dim, spectral_, false,
                                              &last_info_);
    auto loss = tape.add(tape.add(tape.scale(rec, static_cast<float>(spectral_.w_rec)),
                                  tape.scale(pred, static_cast<float>(spectral_.w_pred))),
                         tape.scale(spec, static_cast<float>(spectral_.w_eigs)));
    return LossResult{loss,
                      {{"loss", tape.value(loss).item()},
                       {"recon", tape.value(rec).item()},
                       {"pred", tape.value(pred).item()},
                       {"eigs", tape.value(spec).item()}}};
}

void Skd::finalize(const std::vector<core::Tensor>& train_samples) {
    if (train_samples.empty()) throw NumericError("skd finalize: no training samples");
    std::vector<linalg::Mat> latents;
    latents.reserve(train_samples.size());
    for (const auto& x : train_samples) latents.push_back(to_mat(encode_raw(x)));
    decomposition_ = linalg::decompose(linalg::koopman_fit_batch(latents), spectral_);
    if (decomposition_->ill_conditioned) {
        throw IllConditionedError("skd finalize: training-set Koopman eigenbasis is ill-conditioned");
    }
}

nlohmann::json Skd::extra_state() const {
    if (!decomposition_) return nlohmann::json::object();
    const auto& d = *decomposition_;
    const int k = d.k.rows;
    auto dump_cmat = [](const linalg::CMat& m) {
        std::vector<double> re, im;
        for (const auto& v : m.a) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        return nlohmann::json{{"re", re}, {"im", im}};
    };
    std::vector<double> eig_re, eig_im;
    for (const auto& v : d.eigenvalues) {
        eig_re.push_back(v.real());
        eig_im.push_back(v.imag());
    }
    std::vector<int> labels;
    for (const auto l : d.mode_labels) labels.push_back(l == linalg::ModeLabel::Static ? 0 : 1);
    return nlohmann::json{{"koopman",
                           {{"k", k},
                            {"matrix", d.k.a},
                            {"eig_re", eig_re},
                            {"eig_im", eig_im},
                            {"v", dump_cmat(d.v)},
                            {"v_inv", dump_cmat(d.v_inv)},
                            {"labels", labels},
                            {"cond", d.cond}}}};
}

void Skd::load_extra_state(const nlohmann::json& j) {
    if (!j.contains("koopman")) return;
    const auto& jk = j.at("koopman");
    const int k = jk.at("k").get<int>();
    linalg::KoopmanDecomposition d;
    d.k = linalg::Mat(k, k);
    d.k.a = jk.at("matrix").get<std::vector<double>>();
    const auto re = jk.at("eig_re").get<std::vector<double>>();
    const auto im = jk.at("eig_im").get<std::vector<double>>();
    for (std::size_t i = 0; i < re.size(); ++i) d.eigenvalues.emplace_back(re[i], im[i]);
    auto load_cmat = [k](const nlohmann::json& jm) {
        linalg::CMat m(k, k);
        const auto mre = jm.at("re").get<std::vector<double>>();
        const auto mim = jm.at("im").get<std::vector<double>>();
        for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = linalg::cplx(mre[i], mim[i]);
        return m;
    };
    d.v = load_cmat(jk.at("v"));
    d.v_inv = load_cmat(jk.at("v_inv"));
    for (const auto l : jk.at("labels").get<std::vector<int>>()) {
        d.mode_labels.push_back(l == 0 ? linalg::ModeLabel::Static : linalg::ModeLabel::Dynamic);
    }
    d.cond = jk.at("cond").get<double>();
    d.ill_conditioned = !(d.cond <= 1e12);
    decomposition_ = std::move(d);
}

// ---------------------------------------------------------------------------
// SsmSkd (per-instance Koopman, single static mode)
// ---------------------------------------------------------------------------

SsmSkd::SsmSkd(CoderGeometry geom, linalg::SpectralConfig spectral, std::vector<int> hidden_dims)
    : KoopmanModelBase(std::move(geom), [&spectral] {
          linalg::SpectralConfig c = spectral;
          c.static_size = 1; // single static mode by construction
          return c;
      }(), std::move(hidden_dims), "ssm_skd") {}

linalg::KoopmanDecomposition SsmSkd::instance_decomposition(const core::Tensor& z_raw) const {
    return linalg::decompose(linalg::koopman_fit_instance(to_mat(z_raw)), spectral_);
}

core::Tensor SsmSkd::encode(const core::Tensor& x) const {
    const core::Tensor z = encode_raw(x);
    return project_split(z, instance_decomposition(z));
}

TrainableModel::LossResult SsmSkd::build_loss(core::Tape& tape, const core::Tensor& batch_rows, int n,
                                              std::uint64_t step_seed) {
    (void)step_seed;
    const std::int64_t o = geom_.step_elems();
    auto x = tape.input(batch_rows.reshape({batch_rows.numel() / o, o}));
    auto z = mlp_forward(tape, params_, enc_spec_, x);
    auto recon = mlp_forward(tape, params_, dec_spec_, z);
    auto rec = reconstruction_mse(tape, recon, x);

    last_info_ = linalg::KoopmanStepInfo{};
    auto pred = linalg::koopman_pred_loss(tape, z, n, geom_.t, spectral_.k_dim, true, &last_info_);
    auto spec = linalg::koopman_spectral_loss(tape, z, n, geom_.t, spectral_.k_dim, spectral_, true,
                                              &last_info_);
    auto loss = tape.add(tape.add(tape.scale(rec, static_cast<float>(spectral_.w_rec)),
                                  tape.scale(pred, static_cast<float>(spectral_.w_pred))),
                         tape.scale(spec, static_cast<float>(spectral_.w_eigs)));
    double static_dev = 0.0;
    for (const auto& lam : last_info_.static_eigenvalues) static_dev += std::abs(lam - 1.0);
    if (!last_info_.static_eigenvalues.empty()) {
        static_dev /= static_cast<double>(last_info_.static_eigenvalues.size());
    }
    return LossResult{loss,
                      {{"loss", tape.value(loss).item()},
                       {"recon", tape.value(rec).item()},
                       {"pred", tape.value(pred).item()},
                       {"eigs", tape.value(spec).item()},
                       {"static_eig_dev", static_dev},
                       {"spectral_skipped", static_cast<double>(last_info_.spectral_skipped)}}};
}

} // namespace msd::models
