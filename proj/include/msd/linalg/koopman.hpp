#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "msd/linalg/eig.hpp"
#include "msd/linalg/mat.hpp"
#include "msd/linalg/svd.hpp"

namespace msd::linalg {

enum class ModeLabel { Static, Dynamic };

enum class StaticMode { Ball, Norm };

struct SpectralConfig {
    int k_dim = 8;
    int static_size = 1;
    StaticMode static_mode = StaticMode::Ball;
    double dynamic_thresh = 0.25; // dynamic modes must stay within radius 1 - thresh
    double w_rec = 1.0;
    double w_pred = 1.0;
    double w_eigs = 1.0;

    void validate() const {
        if (k_dim < 1) throw ConfigError("spectral config: k_dim must be >= 1");
        if (static_size < 1 || static_size >= k_dim) {
            throw ConfigError("spectral config: need 1 <= static_size < k_dim");
        }
        if (!(dynamic_thresh > 0.0 && dynamic_thresh < 1.0)) {
            throw ConfigError("spectral config: dynamic_thresh must lie in (0,1)");
        }
        if (w_rec < 0.0 || w_pred < 0.0 || w_eigs < 0.0) {
            throw ConfigError("spectral config: loss weights must be >= 0");
        }
    }
};

struct KoopmanDecomposition {
    Mat k;                         // K x K Koopman matrix
    std::vector<cplx> eigenvalues; // sorted as in eig()
    CMat v;
    CMat v_inv;
    std::vector<ModeLabel> mode_labels;
    double cond = 0.0;
    bool ill_conditioned = false;
};

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

// Z_i: T x K (rows are time steps). Min-norm least squares for
// Z[0:T-2] K = Z[1:T-1].
inline Mat koopman_fit_instance(const Mat& z) {
    if (z.rows < 2) throw NumericError("koopman fit: need T >= 2");
    const int t = z.rows, k = z.cols;
    Mat a(t - 1, k), b(t - 1, k);
    for (int r = 0; r < t - 1; ++r)
        for (int c = 0; c < k; ++c) {
            a.at(r, c) = z.at(r, c);
            b.at(r, c) = z.at(r + 1, c);
        }
    return lstsq(a, b);
}

// Z: N instances stacked, each T x K; consecutive-step pairs from every
// instance are pooled into one least-squares problem.
inline Mat koopman_fit_batch(const std::vector<Mat>& z) {
    if (z.empty()) throw NumericError("koopman fit: empty batch");
    const int k = z.front().cols;
    int rows = 0;
    for (const Mat& zi : z) {
        if (zi.rows < 2) throw NumericError("koopman fit: need T >= 2");
        if (zi.cols != k) throw NumericError("koopman fit: inconsistent K");
        rows += zi.rows - 1;
    }
    Mat a(rows, k), b(rows, k);
    int r0 = 0;
    for (const Mat& zi : z) {
        for (int r = 0; r + 1 < zi.rows; ++r, ++r0)
            for (int c = 0; c < k; ++c) {
                a.at(r0, c) = zi.at(r, c);
                b.at(r0, c) = zi.at(r + 1, c);
            }
    }
    return lstsq(a, b);
}

// ---------------------------------------------------------------------------
// Mode classification and spectral loss
// ---------------------------------------------------------------------------

namespace detail {

// Groups of eigenvalue indices: conjugate pairs together, reals alone.
inline std::vector<std::vector<int>> conjugate_groups(const std::vector<cplx>& eigs) {
    std::vector<std::vector<int>> groups;
    const int n = static_cast<int>(eigs.size());
    for (int i = 0; i < n; ++i) {
        if (eigs[static_cast<std::size_t>(i)].imag() == 0.0) {
            groups.push_back({i});
        } else if (i + 1 < n && eigs[static_cast<std::size_t>(i + 1)] == std::conj(eigs[static_cast<std::size_t>(i)])) {
            groups.push_back({i, i + 1});
            ++i;
        } else {
            // Unpaired complex eigenvalue (should not happen for real input).
            groups.push_back({i});
        }
    }
    return groups;
}

} // namespace detail

inline double mode_distance(const cplx& lambda, StaticMode mode) {
    return mode == StaticMode::Ball ? std::abs(lambda - 1.0) : std::abs(std::abs(lambda) - 1.0);
}

// Static modes are the static_size groups closest to the unit eigenvalue
// under d(lambda); a conjugate pair consumes one slot and is labeled jointly.
inline std::vector<ModeLabel> classify_modes(const std::vector<cplx>& eigs, const SpectralConfig& cfg) {
    const int n = static_cast<int>(eigs.size());
    if (cfg.static_size >= n) throw ConfigError("classify_modes: static_size must be < K");
    const auto groups = detail::conjugate_groups(eigs);
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        const double dx = mode_distance(eigs[static_cast<std::size_t>(groups[static_cast<std::size_t>(x)][0])], cfg.static_mode);
        const double dy = mode_distance(eigs[static_cast<std::size_t>(groups[static_cast<std::size_t>(y)][0])], cfg.static_mode);
        return dx < dy;
    });
    std::vector<ModeLabel> labels(static_cast<std::size_t>(n), ModeLabel::Dynamic);
    int taken = 0;
    for (const int gi : order) {
        if (taken >= cfg.static_size) break;
        for (const int idx : groups[static_cast<std::size_t>(gi)]) labels[static_cast<std::size_t>(idx)] = ModeLabel::Static;
        ++taken;
    }
    return labels;
}

// Sum over static modes of |lambda - 1|^2 plus hinge penalty pushing dynamic
// modes inside radius 1 - dynamic_thresh.
inline double spectral_loss(const std::vector<cplx>& eigs, const std::vector<ModeLabel>& labels,
                            const SpectralConfig& cfg) {
    if (eigs.size() != labels.size()) throw NumericError("spectral_loss: label count mismatch");
    const double radius = 1.0 - cfg.dynamic_thresh;
    double loss = 0.0;
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        if (labels[i] == ModeLabel::Static) {
            loss += std::norm(eigs[i] - 1.0);
        } else {
            const double excess = std::abs(eigs[i]) - radius;
            if (excess > 0.0) loss += excess * excess;
        }
    }
    return loss;
}

// d(loss)/d(lambda_j) as the Wirtinger-style complex weight w_j with
// dL = sum_j Re(conj(w_j) dlambda_j).
inline std::vector<cplx> spectral_loss_eig_grad(const std::vector<cplx>& eigs,
                                                const std::vector<ModeLabel>& labels,
                                                const SpectralConfig& cfg) {
    const double radius = 1.0 - cfg.dynamic_thresh;
    std::vector<cplx> w(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        if (labels[i] == ModeLabel::Static) {
            w[i] = 2.0 * (eigs[i] - 1.0);
        } else {
            const double mag = std::abs(eigs[i]);
            const double excess = mag - radius;
            w[i] = (excess > 0.0 && mag > 0.0) ? cplx(2.0 * excess / mag) * eigs[i] : cplx(0.0);
        }
    }
    return w;
}

// First-order eigenvalue perturbation with frozen eigenvectors:
// dlambda_j / dK[p][q] = Vinv[j][p] * V[q][j], so the real gradient is
// G[p][q] = sum_j Re(conj(w_j) Vinv[j][p] V[q][j]).
inline Mat eigen_perturbation_grad(const std::vector<cplx>& w, const CMat& v, const CMat& v_inv) {
    const int n = v.rows;
    Mat g(n, n);
    for (int j = 0; j < n; ++j) {
        const cplx wj = std::conj(w[static_cast<std::size_t>(j)]);
        if (wj == cplx(0.0)) continue;
        for (int p = 0; p < n; ++p) {
            const cplx left = wj * v_inv.at(j, p);
            for (int q = 0; q < n; ++q) g.at(p, q) += (left * v.at(q, j)).real();
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Eigenspace projections
// ---------------------------------------------------------------------------

// Expands a mode subset so it is closed under conjugation and does not split
// numerically-degenerate eigenvalue clusters (|l_a - l_b| < 1e-10).
inline std::vector<int> close_mode_subset(const std::vector<cplx>& eigs, std::vector<int> subset) {
    std::vector<char> in(eigs.size(), 0);
    for (const int i : subset) in.at(static_cast<std::size_t>(i)) = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < eigs.size(); ++i) {
            if (!in[i]) continue;
            for (std::size_t j = 0; j < eigs.size(); ++j) {
                if (in[j]) continue;
                const bool conj_pair = eigs[j] == std::conj(eigs[i]) && eigs[i].imag() != 0.0;
                const bool degenerate = std::abs(eigs[i] - eigs[j]) < 1e-10;
                if (conj_pair || degenerate) {
                    in[j] = 1;
                    changed = true;
                }
            }
        }
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < eigs.size(); ++i)
        if (in[i]) out.push_back(static_cast<int>(i));
    return out;
}

inline bool is_conjugate_closed(const std::vector<cplx>& eigs, const std::vector<int>& subset) {
    std::vector<char> in(eigs.size(), 0);
    for (const int i : subset) in.at(static_cast<std::size_t>(i)) = 1;
    for (const int i : subset) {
        const cplx lam = eigs[static_cast<std::size_t>(i)];
        if (lam.imag() == 0.0) continue;
        bool found = false;
        for (std::size_t j = 0; j < eigs.size(); ++j) {
            if (in[j] && eigs[j] == std::conj(lam)) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// P_S = V[:,S] Vinv[S,:]; real for conjugate-closed S.
inline Mat mode_projector(const std::vector<cplx>& eigs, const CMat& v, const CMat& v_inv,
                          const std::vector<int>& subset) {
    if (subset.empty()) throw NumericError("mode_projector: empty subset");
    if (!is_conjugate_closed(eigs, subset)) {
        throw NumericError("mode_projector: subset not closed under conjugation");
    }
    const int n = v.rows;
    Mat p(n, n);
    double max_imag = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (const int s : subset) acc += v.at(r, s) * v_inv.at(s, c);
            max_imag = std::max(max_imag, std::abs(acc.imag()));
            p.at(r, c) = acc.real();
        }
    const double pscale = std::max(1.0, p.frob_norm());
    if (max_imag > 1e-8 * pscale) {
        throw NumericError("mode_projector: projector has non-negligible imaginary part");
    }
    return p;
}

// Z_i (T x K real) projected onto the invariant subspace of the modes in S.
inline Mat project_modes(const Mat& z, const std::vector<cplx>& eigs, const CMat& v, const CMat& v_inv,
                         const std::vector<int>& subset) {
    return matmul(z, mode_projector(eigs, v, v_inv, subset));
}

inline std::vector<int> modes_with_label(const std::vector<ModeLabel>& labels, ModeLabel which) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == which) idx.push_back(static_cast<int>(i));
    return idx;
}

// Full decomposition for a fitted Koopman matrix.
inline KoopmanDecomposition decompose(Mat k_mat, const SpectralConfig& cfg) {
    KoopmanDecomposition d;
    EigResult e = eig(k_mat);
    d.k = std::move(k_mat);
    d.eigenvalues = std::move(e.values);
    d.v = std::move(e.v);
    d.v_inv = std::move(e.v_inv);
    d.cond = e.cond;
    d.ill_conditioned = e.ill_conditioned;
    d.mode_labels = classify_modes(d.eigenvalues, cfg);
    return d;
}

} // namespace msd::linalg
