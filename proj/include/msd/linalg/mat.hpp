#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "msd/util/error.hpp"

namespace msd::linalg {

using cplx = std::complex<double>;

// Row-major dense double matrix; the 64-bit workhorse behind the Koopman
// fits, the eigensolver and the custom autodiff ops.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    Mat transposed() const {
        Mat t(cols, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
        return t;
    }

    double frob_norm() const {
        double s = 0.0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

inline Mat matmul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw NumericError("mat: matmul shape mismatch");
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int k = 0; k < x.cols; ++k) {
            const double v = x.at(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) z.at(i, j) += v * y.at(k, j);
        }
    }
    return z;
}

inline Mat operator-(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw NumericError("mat: sub shape mismatch");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] -= y.a[i];
    return z;
}

inline Mat operator+(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw NumericError("mat: add shape mismatch");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
    return z;
}

inline Mat scale(const Mat& x, double s) {
    Mat z = x;
    for (auto& v : z.a) v *= s;
    return z;
}

// Complex counterpart, used for eigenvectors and their inverse.
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<cplx> a;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    cplx& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    const cplx& at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static CMat identity(int n) {
        CMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double frob_norm() const {
        double s = 0.0;
        for (const cplx& v : a) s += std::norm(v);
        return std::sqrt(s);
    }
};

inline CMat matmul(const CMat& x, const CMat& y) {
    if (x.cols != y.rows) throw NumericError("mat: cmatmul shape mismatch");
    CMat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const cplx v = x.at(i, k);
            for (int j = 0; j < y.cols; ++j) z.at(i, j) += v * y.at(k, j);
        }
    return z;
}

// In-place partial-pivot LU; returns false on exact singularity.
struct CLu {
    CMat lu;
    std::vector<int> piv;

    bool factor(CMat m) {
        const int n = m.rows;
        piv.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) piv[i] = i;
        for (int k = 0; k < n; ++k) {
            int p = k;
            double best = std::abs(m.at(k, k));
            for (int i = k + 1; i < n; ++i) {
                const double v = std::abs(m.at(i, k));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best == 0.0) return false;
            if (p != k) {
                for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
                std::swap(piv[k], piv[p]);
            }
            const cplx inv = 1.0 / m.at(k, k);
            for (int i = k + 1; i < n; ++i) {
                const cplx f = m.at(i, k) * inv;
                m.at(i, k) = f;
                for (int j = k + 1; j < n; ++j) m.at(i, j) -= f * m.at(k, j);
            }
        }
        lu = std::move(m);
        return true;
    }

    // Solve LU x = b (in place permutation applied to a copy of b).
    std::vector<cplx> solve(const std::vector<cplx>& b) const {
        const int n = lu.rows;
        std::vector<cplx> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[i] = b[static_cast<std::size_t>(piv[i])];
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] -= lu.at(i, j) * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] -= lu.at(i, j) * x[j];
            x[i] /= lu.at(i, i);
        }
        return x;
    }
};

// Inverse via LU; throws on singular input.
inline CMat inverse(const CMat& m) {
    if (m.rows != m.cols) throw NumericError("mat: inverse of non-square");
    CLu lu;
    if (!lu.factor(m)) throw NumericError("mat: singular matrix in inverse");
    const int n = m.rows;
    CMat inv(n, n);
    std::vector<cplx> e(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[static_cast<std::size_t>(c)] = 1.0;
        const auto col = lu.solve(e);
        for (int r = 0; r < n; ++r) inv.at(r, c) = col[static_cast<std::size_t>(r)];
    }
    return inv;
}

} // namespace msd::linalg
