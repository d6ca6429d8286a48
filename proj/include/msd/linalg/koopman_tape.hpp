#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "msd/core/tape.hpp"
#include "msd/linalg/koopman.hpp"
#include "msd/linalg/svd.hpp"

// Tape nodes for the Koopman loss terms. Forward runs in double regardless
// of the tape scalar: the matrix is fit with min-norm least squares and the
// spectrum comes from the dense eigensolver. Backward rules:
//   - prediction term: K is the residual minimizer, so d/dZ holds K fixed
//     (envelope theorem makes that exact);
//   - spectral term: dL/dK via first-order eigenvalue perturbation with the
//     step's eigenvectors frozen, then through the least-squares fit via the
//     constant-rank pseudoinverse derivative.

namespace msd::linalg {

struct KoopmanStepInfo {
    double pred = 0.0;
    double spectral = 0.0;
    int instances = 0;
    int spectral_skipped = 0; // ill-conditioned per-instance eigenbases
    std::optional<KoopmanDecomposition> batch_decomposition;
    std::vector<cplx> static_eigenvalues; // one per instance (per-instance mode)
};

namespace detail {

template <typename S>
Mat z_block(const core::TensorT<S>& z, int row0, int rows, int k) {
    Mat m(rows, k);
    const S* p = z.data();
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < k; ++c) m.at(r, c) = static_cast<double>(p[(row0 + r) * k + c]);
    return m;
}

struct PairedSystem {
    Mat a; // rows Z[t], t in [0, T-2]
    Mat b; // rows Z[t+1]
};

template <typename S>
PairedSystem paired_system(const core::TensorT<S>& z, int n, int t, int k) {
    PairedSystem sys{Mat((t - 1) * n, k), Mat((t - 1) * n, k)};
    const S* p = z.data();
    int r0 = 0;
    for (int i = 0; i < n; ++i) {
        for (int step = 0; step + 1 < t; ++step, ++r0) {
            for (int c = 0; c < k; ++c) {
                sys.a.at(r0, c) = static_cast<double>(p[(i * t + step) * k + c]);
                sys.b.at(r0, c) = static_cast<double>(p[(i * t + step + 1) * k + c]);
            }
        }
    }
    return sys;
}

// Scatter dA/dB (stacked pair rows) back onto the [N*T, K] latent gradient.
template <typename S>
void scatter_pairs(std::vector<S>& gz, const Mat& da, const Mat& db, int n, int t, int k, double scale) {
    int r0 = 0;
    for (int i = 0; i < n; ++i) {
        for (int step = 0; step + 1 < t; ++step, ++r0) {
            for (int c = 0; c < k; ++c) {
                gz[static_cast<std::size_t>((i * t + step) * k + c)] += static_cast<S>(scale * da.at(r0, c));
                gz[static_cast<std::size_t>((i * t + step + 1) * k + c)] += static_cast<S>(scale * db.at(r0, c));
            }
        }
    }
}

// dL/dA and dL/dB of X = pinv(A) B given G = dL/dX (constant-rank formula).
struct LstsqBackward {
    Mat da;
    Mat db;
};

inline LstsqBackward lstsq_backward(const Svd& s, const Mat& a, const Mat& b, const Mat& x, const Mat& g) {
    LstsqBackward out;
    out.db = pinv_t_apply(s, g); // pinv(A)^T G : m x k
    const Mat r0 = b - matmul(a, x);
    const Mat gt = g.transposed();
    // term1 = -pinv(A)^T G X^T
    Mat term1 = pinv_t_apply(s, matmul(g, x.transposed()));
    for (auto& v : term1.a) v = -v;
    // term2 = R0 G^T pinv(A) pinv(A)^T
    const Mat term2 = matmul(matmul(r0, gt), pinv_gram(s));
    // term3 = pinv(A)^T X G^T (I - pinv(A) A)
    Mat ip = row_space_projector(s);
    for (int i = 0; i < ip.rows; ++i)
        for (int j = 0; j < ip.cols; ++j) ip.at(i, j) = (i == j ? 1.0 : 0.0) - ip.at(i, j);
    const Mat term3 = pinv_t_apply(s, matmul(matmul(x, gt), ip));
    out.da = term1 + term2 + term3;
    return out;
}

} // namespace detail

// Mean squared one-step prediction error ||Z_next - Z_prev K||^2 / (N (T-1) K)
// with K refit per call (batch-level or per-instance).
template <typename S>
typename core::TapeT<S>::Var koopman_pred_loss(core::TapeT<S>& tape, typename core::TapeT<S>::Var zvar,
                                               int n, int t, int k, bool per_instance,
                                               KoopmanStepInfo* info = nullptr) {
    using Tensor = core::TensorT<S>;
    const Tensor& z = tape.value(zvar);
    if (z.ndim() != 2 || z.dim(0) != static_cast<std::int64_t>(n) * t || z.dim(1) != k) {
        throw NumericError("koopman_pred_loss: latent shape mismatch");
    }
    if (t < 2) throw NumericError("koopman_pred_loss: need T >= 2");
    const double norm = 1.0 / (static_cast<double>(n) * (t - 1) * k);

    struct Fit {
        Mat a, b, x; // per group (one group = batch, or one per instance)
    };
    auto fits = std::make_shared<std::vector<Fit>>();
    double loss = 0.0;
    if (per_instance) {
        for (int i = 0; i < n; ++i) {
            Mat zi = detail::z_block(z, i * t, t, k);
            Mat a(t - 1, k), b(t - 1, k);
            for (int r = 0; r + 1 < t; ++r)
                for (int c = 0; c < k; ++c) {
                    a.at(r, c) = zi.at(r, c);
                    b.at(r, c) = zi.at(r + 1, c);
                }
            Mat x = lstsq(a, b);
            const Mat resid = matmul(a, x) - b;
            const double rn = resid.frob_norm();
            loss += rn * rn * norm;
            fits->push_back(Fit{std::move(a), std::move(b), std::move(x)});
        }
    } else {
        auto sys = detail::paired_system(z, n, t, k);
        Mat x = lstsq(sys.a, sys.b);
        const Mat resid = matmul(sys.a, x) - sys.b;
        const double rn = resid.frob_norm();
        loss = rn * rn * norm;
        fits->push_back(Fit{std::move(sys.a), std::move(sys.b), std::move(x)});
    }
    if (info) {
        info->pred = loss;
        info->instances = n;
    }

    auto shape = z.shape();
    return tape.custom(Tensor::scalar(static_cast<S>(loss)), {zvar},
                       [fits, shape, n, t, k, norm, per_instance](const Tensor& gout) {
                           std::vector<S> gz(static_cast<std::size_t>(n) * t * k, S(0));
                           const double go = static_cast<double>(gout.item());
                           for (std::size_t gi = 0; gi < fits->size(); ++gi) {
                               const auto& f = (*fits)[gi];
                               const Mat resid = matmul(f.a, f.x) - f.b; // A K - B
                               Mat da = matmul(resid, f.x.transposed());
                               Mat db = resid;
                               for (auto& v : da.a) v *= 2.0 * norm;
                               for (auto& v : db.a) v *= -2.0 * norm;
                               if (per_instance) {
                                   const int i = static_cast<int>(gi);
                                   for (int r = 0; r + 1 < t; ++r)
                                       for (int c = 0; c < k; ++c) {
                                           gz[static_cast<std::size_t>((i * t + r) * k + c)] +=
                                               static_cast<S>(go * da.at(r, c));
                                           gz[static_cast<std::size_t>((i * t + r + 1) * k + c)] +=
                                               static_cast<S>(go * db.at(r, c));
                                       }
                               } else {
                                   detail::scatter_pairs(gz, da, db, n, t, k, go);
                               }
                           }
                           return std::vector<Tensor>{Tensor(shape, std::move(gz))};
                       });
}

// Spectral penalty on the fitted Koopman matrix (batch or per-instance mean).
// Per-instance eigenbases flagged ill-conditioned are skipped and counted.
template <typename S>
typename core::TapeT<S>::Var koopman_spectral_loss(core::TapeT<S>& tape, typename core::TapeT<S>::Var zvar,
                                                   int n, int t, int k, const SpectralConfig& cfg,
                                                   bool per_instance, KoopmanStepInfo* info = nullptr) {
    using Tensor = core::TensorT<S>;
    cfg.validate();
    if (cfg.k_dim != k) throw NumericError("koopman_spectral_loss: k_dim mismatch");
    const Tensor& z = tape.value(zvar);
    if (z.ndim() != 2 || z.dim(0) != static_cast<std::int64_t>(n) * t || z.dim(1) != k) {
        throw NumericError("koopman_spectral_loss: latent shape mismatch");
    }
    if (t < 2) throw NumericError("koopman_spectral_loss: need T >= 2");

    struct Group {
        int instance; // -1 for batch
        Svd svd_a;
        Mat a, b, x;
        Mat g_k; // dL_spec/dK for this group (unweighted, before averaging)
    };
    auto groups = std::make_shared<std::vector<Group>>();
    double total = 0.0;
    int used = 0, skipped = 0;

    auto handle = [&](Mat a, Mat b, int instance) {
        Svd s = svd(a);
        Mat x = lstsq(s, b);
        KoopmanDecomposition d;
        try {
            d = decompose(x, cfg);
        } catch (const NumericError&) {
            ++skipped;
            return;
        }
        if (d.ill_conditioned) {
            ++skipped;
            return;
        }
        const double l = spectral_loss(d.eigenvalues, d.mode_labels, cfg);
        const auto w = spectral_loss_eig_grad(d.eigenvalues, d.mode_labels, cfg);
        Mat gk = eigen_perturbation_grad(w, d.v, d.v_inv);
        total += l;
        ++used;
        if (info) {
            if (instance < 0) {
                info->batch_decomposition = d;
            } else {
                for (std::size_t m = 0; m < d.mode_labels.size(); ++m) {
                    if (d.mode_labels[m] == ModeLabel::Static) {
                        info->static_eigenvalues.push_back(d.eigenvalues[m]);
                        break;
                    }
                }
            }
        }
        groups->push_back(Group{instance, std::move(s), std::move(a), std::move(b), std::move(x), std::move(gk)});
    };

    if (per_instance) {
        for (int i = 0; i < n; ++i) {
            Mat zi = detail::z_block(z, i * t, t, k);
            Mat a(t - 1, k), b(t - 1, k);
            for (int r = 0; r + 1 < t; ++r)
                for (int c = 0; c < k; ++c) {
                    a.at(r, c) = zi.at(r, c);
                    b.at(r, c) = zi.at(r + 1, c);
                }
            handle(std::move(a), std::move(b), i);
        }
        if (used == 0) throw NumericError("koopman_spectral_loss: every instance was ill-conditioned");
    } else {
        auto sys = detail::paired_system(z, n, t, k);
        handle(std::move(sys.a), std::move(sys.b), -1);
        if (used == 0) throw IllConditionedError("koopman_spectral_loss: batch eigenbasis ill-conditioned");
    }
    const double mean_loss = total / used;
    if (info) {
        info->spectral = mean_loss;
        info->spectral_skipped = skipped;
    }

    auto shape = z.shape();
    const double avg = 1.0 / used;
    return tape.custom(Tensor::scalar(static_cast<S>(mean_loss)), {zvar},
                       [groups, shape, n, t, k, avg](const Tensor& gout) {
                           std::vector<S> gz(static_cast<std::size_t>(n) * t * k, S(0));
                           const double go = static_cast<double>(gout.item()) * avg;
                           for (const auto& grp : *groups) {
                               auto bw = detail::lstsq_backward(grp.svd_a, grp.a, grp.b, grp.x, grp.g_k);
                               if (grp.instance < 0) {
                                   detail::scatter_pairs(gz, bw.da, bw.db, n, t, k, go);
                               } else {
                                   const int i = grp.instance;
                                   for (int r = 0; r + 1 < t; ++r)
                                       for (int c = 0; c < k; ++c) {
                                           gz[static_cast<std::size_t>((i * t + r) * k + c)] +=
                                               static_cast<S>(go * bw.da.at(r, c));
                                           gz[static_cast<std::size_t>((i * t + r + 1) * k + c)] +=
                                               static_cast<S>(go * bw.db.at(r, c));
                                       }
                               }
                           }
                           return std::vector<Tensor>{Tensor(shape, std::move(gz))};
                       });
}

} // namespace msd::linalg
