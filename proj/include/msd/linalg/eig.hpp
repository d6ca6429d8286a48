#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "msd/linalg/mat.hpp"
#include "msd/util/error.hpp"

// Dense nonsymmetric eigensolver: Householder Hessenberg reduction, Francis
// double-shift QR for the spectrum, then shifted inverse iteration for the
// eigenvectors (orthogonalized inside eigenvalue clusters). V^-1 comes from a
// partial-pivot complex LU.

namespace msd::linalg {

struct EigResult {
    std::vector<cplx> values; // sorted: |lambda| desc, then Re desc, then Im desc
    CMat v;                   // right eigenvectors as columns
    CMat v_inv;
    double cond = 0.0;        // ||V||_F * ||V^-1||_F
    bool ill_conditioned = false; // cond > 1e12
};

namespace detail {

inline void hessenberg_inplace(Mat& h) {
    const int n = h.rows;
    for (int k = 1; k < n - 1; ++k) {
        // Householder vector annihilating h[k+1..n-1][k-1].
        double scale = 0.0;
        for (int i = k; i < n; ++i) scale += std::abs(h.at(i, k - 1));
        if (scale == 0.0) continue;
        std::vector<double> u(static_cast<std::size_t>(n - k));
        double sigma = 0.0;
        for (int i = k; i < n; ++i) {
            u[static_cast<std::size_t>(i - k)] = h.at(i, k - 1) / scale;
            sigma += u[static_cast<std::size_t>(i - k)] * u[static_cast<std::size_t>(i - k)];
        }
        double alpha = std::sqrt(sigma);
        if (u[0] > 0) alpha = -alpha;
        u[0] -= alpha;
        const double beta = -alpha * u[0]; // = u^T u / 2
        if (beta == 0.0) continue;
        // H <- P H P with P = I - u u^T / beta
        for (int j = 0; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += u[static_cast<std::size_t>(i - k)] * h.at(i, j);
            dot /= beta;
            for (int i = k; i < n; ++i) h.at(i, j) -= dot * u[static_cast<std::size_t>(i - k)];
        }
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = k; j < n; ++j) dot += h.at(i, j) * u[static_cast<std::size_t>(j - k)];
            dot /= beta;
            for (int j = k; j < n; ++j) h.at(i, j) -= dot * u[static_cast<std::size_t>(j - k)];
        }
        h.at(k, k - 1) = alpha * scale;
        for (int i = k + 1; i < n; ++i) h.at(i, k - 1) = 0.0;
    }
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
inline std::vector<cplx> hqr(Mat h) {
    const int n = h.rows;
    std::vector<cplx> eig(static_cast<std::size_t>(n));
    const double eps = 2.22e-16;
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(h.at(i, j));
    if (anorm == 0.0) return eig; // zero matrix
    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                const double s0 = std::abs(h.at(l - 1, l - 1)) + std::abs(h.at(l, l));
                const double s = (s0 == 0.0) ? anorm : s0;
                if (std::abs(h.at(l, l - 1)) <= eps * s) {
                    h.at(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = h.at(nn, nn);
            if (l == nn) {
                eig[static_cast<std::size_t>(nn)] = cplx(x + t, 0.0);
                --nn;
            } else {
                double y = h.at(nn - 1, nn - 1);
                double w = h.at(nn, nn - 1) * h.at(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0.0 ? std::abs(z) : -std::abs(z));
                        eig[static_cast<std::size_t>(nn - 1)] = eig[static_cast<std::size_t>(nn)] = cplx(x + z, 0.0);
                        if (z != 0.0) eig[static_cast<std::size_t>(nn)] = cplx(x - w / z, 0.0);
                    } else {
                        eig[static_cast<std::size_t>(nn)] = cplx(x + p, -z);
                        eig[static_cast<std::size_t>(nn - 1)] = cplx(x + p, z);
                    }
                    nn -= 2;
                } else {
                    if (its == 60) throw NumericError("eig: QR iteration did not converge");
                    if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) h.at(i, i) -= x;
                        const double s = std::abs(h.at(nn, nn - 1)) + std::abs(h.at(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        z = h.at(m, m);
                        const double rr = x - z;
                        const double ss = y - z;
                        p = (rr * ss - w) / h.at(m + 1, m) + h.at(m, m + 1);
                        q = h.at(m + 1, m + 1) - z - rr - ss;
                        r = h.at(m + 2, m + 1);
                        const double s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(h.at(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(h.at(m - 1, m - 1)) + std::abs(z) + std::abs(h.at(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        h.at(i, i - 2) = 0.0;
                        if (i > m + 2) h.at(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        double xscale = 0.0;
                        if (k != m) {
                            p = h.at(k, k - 1);
                            q = h.at(k + 1, k - 1);
                            r = (k != nn - 1) ? h.at(k + 2, k - 1) : 0.0;
                            xscale = std::abs(p) + std::abs(q) + std::abs(r);
                            if (xscale != 0.0) {
                                p /= xscale;
                                q /= xscale;
                                r /= xscale;
                            }
                        }
                        double s = std::sqrt(p * p + q * q + r * r);
                        if (p < 0.0) s = -s;
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) h.at(k, k - 1) = -h.at(k, k - 1);
                        } else {
                            h.at(k, k - 1) = -s * xscale;
                        }
                        p += s;
                        const double xx = p / s;
                        const double yy = q / s;
                        const double zz = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            double pp = h.at(k, j) + q * h.at(k + 1, j);
                            if (k != nn - 1) {
                                pp += r * h.at(k + 2, j);
                                h.at(k + 2, j) -= pp * zz;
                            }
                            h.at(k + 1, j) -= pp * yy;
                            h.at(k, j) -= pp * xx;
                        }
                        const int mmin = std::min(nn, k + 3);
                        for (int i = l; i <= mmin; ++i) {
                            double pp = xx * h.at(i, k) + yy * h.at(i, k + 1);
                            if (k != nn - 1) {
                                pp += zz * h.at(i, k + 2);
                                h.at(i, k + 2) -= pp * r;
                            }
                            h.at(i, k + 1) -= pp * q;
                            h.at(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1 && nn >= 0);
    }
    return eig;
}

} // namespace detail

inline std::vector<cplx> eigenvalues(const Mat& a) {
    if (a.rows != a.cols || a.rows < 1) throw NumericError("eig: matrix must be square, K >= 1");
    if (a.rows == 1) return {cplx(a.at(0, 0), 0.0)};
    Mat h = a;
    detail::hessenberg_inplace(h);
    auto eig = detail::hqr(std::move(h));
    std::stable_sort(eig.begin(), eig.end(), [](const cplx& x, const cplx& y) {
        const double mx = std::abs(x), my = std::abs(y);
        if (mx != my) return mx > my;
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    return eig;
}

inline EigResult eig(const Mat& a) {
    EigResult res;
    res.values = eigenvalues(a);
    const int n = a.rows;
    const double anorm = a.frob_norm();
    const double scale = std::max(anorm, 1e-300);
    res.v = CMat(n, n);

    // Inverse iteration per eigenvalue; conjugate partners reuse the
    // conjugated vector so project_modes stays exactly real.
    std::vector<std::vector<cplx>> vectors(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const cplx lam = res.values[static_cast<std::size_t>(j)];
        if (j > 0 && res.values[static_cast<std::size_t>(j - 1)] == std::conj(lam) && lam.imag() != 0.0) {
            auto vconj = vectors[static_cast<std::size_t>(j - 1)];
            for (auto& c : vconj) c = std::conj(c);
            vectors[static_cast<std::size_t>(j)] = std::move(vconj);
            continue;
        }
        // Cluster = previously computed eigenvalues numerically equal to lam.
        std::vector<int> cluster;
        for (int i = 0; i < j; ++i) {
            if (std::abs(res.values[static_cast<std::size_t>(i)] - lam) <= 1e-8 * scale) cluster.push_back(i);
        }
        std::vector<cplx> v;
        bool ok = false;
        for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
            const double bump = (attempt + static_cast<double>(cluster.size())) * 1e-12 * scale + 1e-13 * scale;
            const cplx mu = lam + cplx(bump, bump * 0.5);
            CMat shifted(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) shifted.at(r, c) = cplx(a.at(r, c), 0.0) - (r == c ? mu : cplx(0.0));
            CLu lu;
            if (!lu.factor(shifted)) continue;
            // Deterministic start: e_{(j+attempt) mod n} plus a small spread.
            std::vector<cplx> b(static_cast<std::size_t>(n), cplx(1e-3, 0.0));
            b[static_cast<std::size_t>((j + attempt) % n)] = 1.0;
            for (int it = 0; it < 5; ++it) {
                v = lu.solve(b);
                // Orthogonalize inside the cluster (modified Gram-Schmidt).
                for (const int ci : cluster) {
                    const auto& u = vectors[static_cast<std::size_t>(ci)];
                    cplx dot = 0.0;
                    for (int i = 0; i < n; ++i) dot += std::conj(u[static_cast<std::size_t>(i)]) * v[static_cast<std::size_t>(i)];
                    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= dot * u[static_cast<std::size_t>(i)];
                }
                double norm = 0.0;
                for (const auto& c : v) norm += std::norm(c);
                norm = std::sqrt(norm);
                if (norm < 1e-290) break;
                for (auto& c : v) c /= norm;
                // Residual ||A v - lam v||.
                double resid = 0.0;
                for (int r = 0; r < n; ++r) {
                    cplx acc = -lam * v[static_cast<std::size_t>(r)];
                    for (int c = 0; c < n; ++c) acc += a.at(r, c) * v[static_cast<std::size_t>(c)];
                    resid += std::norm(acc);
                }
                if (std::sqrt(resid) <= 1e-10 * scale) {
                    ok = true;
                    break;
                }
                b = v;
            }
        }
        if (!ok || v.empty()) throw NumericError("eig: inverse iteration failed to converge");
        // Phase-normalize: largest-magnitude component made real positive.
        int pk = 0;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(v[static_cast<std::size_t>(i)]);
            if (mag > best + 1e-14) {
                best = mag;
                pk = i;
            }
        }
        const cplx phase = v[static_cast<std::size_t>(pk)] / std::abs(v[static_cast<std::size_t>(pk)]);
        for (auto& c : v) c /= phase;
        vectors[static_cast<std::size_t>(j)] = std::move(v);
    }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) res.v.at(i, j) = vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];

    try {
        res.v_inv = inverse(res.v);
    } catch (const NumericError&) {
        throw IllConditionedError("eig: eigenvector matrix is singular");
    }
    res.cond = res.v.frob_norm() * res.v_inv.frob_norm();
    res.ill_conditioned = !(res.cond <= 1e12);
    return res;
}

} // namespace msd::linalg
