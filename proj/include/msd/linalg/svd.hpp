#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "msd/linalg/mat.hpp"

namespace msd::linalg {

// Thin SVD A = U diag(sigma) V^T with U: m x n, V: n x n (m >= n is arranged
// internally by transposing). One-sided Jacobi: slow-ish but simple and very
// accurate, which is what the Koopman fits need at K <= 64.
struct Svd {
    Mat u;                     // m x n, orthonormal columns for sigma > 0
    std::vector<double> sigma; // length n, descending
    Mat v;                     // n x n orthogonal
    int rank = 0;
    double tol = 0.0; // rank cutoff actually used
};

namespace detail {

// One-sided Jacobi on a tall (m >= n) matrix.
inline Svd jacobi_svd_tall(const Mat& a) {
    const int m = a.rows, n = a.cols;
    Mat w = a;
    Mat v = Mat::identity(n);
    const double eps = 1e-15;
    bool rotated = true;
    for (int sweep = 0; sweep < 60 && rotated; ++sweep) {
        rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double wp = w.at(i, p), wq = w.at(i, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double wp = w.at(i, p), wq = w.at(i, q);
                    w.at(i, p) = c * wp - s * wq;
                    w.at(i, q) = s * wp + c * wq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v.at(i, p), vq = v.at(i, q);
                    v.at(i, p) = c * vp - s * vq;
                    v.at(i, q) = s * vp + c * vq;
                }
            }
        }
    }
    Svd out;
    out.sigma.resize(static_cast<std::size_t>(n));
    out.u = Mat(m, n);
    out.v = Mat(n, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double s2 = 0.0;
        for (int i = 0; i < m; ++i) s2 += w.at(i, j) * w.at(i, j);
        norms[static_cast<std::size_t>(j)] = std::sqrt(s2);
    }
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
    });
    for (int j = 0; j < n; ++j) {
        const int src = order[static_cast<std::size_t>(j)];
        const double sj = norms[static_cast<std::size_t>(src)];
        out.sigma[static_cast<std::size_t>(j)] = sj;
        const double inv = sj > 0.0 ? 1.0 / sj : 0.0;
        for (int i = 0; i < m; ++i) out.u.at(i, j) = w.at(i, src) * inv;
        for (int i = 0; i < n; ++i) out.v.at(i, j) = v.at(i, src);
    }
    const double smax = out.sigma.empty() ? 0.0 : out.sigma[0];
    out.tol = static_cast<double>(std::max(m, n)) * 1e-15 * smax;
    out.rank = 0;
    for (const double s : out.sigma)
        if (s > out.tol) ++out.rank;
    return out;
}

} // namespace detail

inline Svd svd(const Mat& a) {
    if (a.rows >= a.cols) return detail::jacobi_svd_tall(a);
    // A = U S V^T  <=>  A^T = V S U^T
    Svd t = detail::jacobi_svd_tall(a.transposed());
    Svd out;
    out.sigma = std::move(t.sigma);
    out.rank = t.rank;
    out.tol = t.tol;
    // For wide A (m < n): U is m x m from t.v's leading block? Keep thin
    // convention relative to min(m, n): U m x r-ish. Simplest: U = t.v
    // restricted to m columns is wrong; recompute properly below.
    // A (m x n), A^T (n x m): A^T = U' S V'^T with U' n x m, V' m x m.
    // Then A = V' S U'^T, so U = V' (m x m) and V = U' (n x m).
    out.u = std::move(t.v); // m x m
    out.v = std::move(t.u); // n x m
    return out;
}

// Min-norm least squares: X = pinv(A) B, A: m x n, B: m x k -> X: n x k.
inline Mat lstsq(const Svd& s, const Mat& b) {
    const int m = s.u.rows, n = s.v.rows, k = b.cols;
    if (b.rows != m) throw NumericError("lstsq: row mismatch");
    const int r = static_cast<int>(s.sigma.size());
    // C = U^T B (r x k)
    Mat c(r, k);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int t = 0; t < m; ++t) acc += s.u.at(t, i) * b.at(t, j);
            c.at(i, j) = acc;
        }
    for (int i = 0; i < r; ++i) {
        const double sv = s.sigma[static_cast<std::size_t>(i)];
        const double inv = sv > s.tol ? 1.0 / sv : 0.0;
        for (int j = 0; j < k; ++j) c.at(i, j) *= inv;
    }
    Mat x(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int t = 0; t < r; ++t) acc += s.v.at(i, t) * c.at(t, j);
            x.at(i, j) = acc;
        }
    return x;
}

inline Mat lstsq(const Mat& a, const Mat& b) {
    if (a.rows != b.rows) throw NumericError("lstsq: A and B row counts differ");
    if (a.rows < 1) throw NumericError("lstsq: need at least one row");
    return lstsq(svd(a), b);
}

// Applies pinv(A)^T (m x n) to an n x k matrix using the SVD factors.
inline Mat pinv_t_apply(const Svd& s, const Mat& g) {
    const int m = s.u.rows, n = s.v.rows, k = g.cols;
    if (g.rows != n) throw NumericError("pinv_t_apply: shape mismatch");
    const int r = static_cast<int>(s.sigma.size());
    Mat c(r, k); // S^+ V^T G
    for (int i = 0; i < r; ++i) {
        const double sv = s.sigma[static_cast<std::size_t>(i)];
        const double inv = sv > s.tol ? 1.0 / sv : 0.0;
        if (inv == 0.0) continue;
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) acc += s.v.at(t, i) * g.at(t, j);
            c.at(i, j) = acc * inv;
        }
    }
    Mat out(m, k);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int t = 0; t < r; ++t) acc += s.u.at(i, t) * c.at(t, j);
            out.at(i, j) = acc;
        }
    return out;
}

// V_r V_r^T with the rank-r column block; projector onto row space of A.
inline Mat row_space_projector(const Svd& s) {
    const int n = s.v.rows;
    Mat p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < s.rank; ++t) acc += s.v.at(i, t) * s.v.at(j, t);
            p.at(i, j) = acc;
        }
    return p;
}

// V S^+ S^+ V^T = pinv(A) pinv(A)^T (n x n).
inline Mat pinv_gram(const Svd& s) {
    const int n = s.v.rows;
    Mat p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < s.rank; ++t) {
                const double sv = s.sigma[static_cast<std::size_t>(t)];
                acc += s.v.at(i, t) * s.v.at(j, t) / (sv * sv);
            }
            p.at(i, j) = acc;
        }
    return p;
}

} // namespace msd::linalg
