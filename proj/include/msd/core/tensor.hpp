#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "msd/util/error.hpp"

namespace msd::core {

// Dense row-major tensor. Value-semantic with shared immutable storage: all
// public operations return fresh tensors, so copies are cheap and safe to
// share across threads. The model-facing alias is the float32 instantiation;
// tests instantiate double for finite-difference oracles.
template <typename S>
class TensorT {
public:
    using Scalar = S;

    TensorT() = default;

    TensorT(std::vector<std::int64_t> shape, std::vector<S> data)
        : shape_(std::move(shape)), data_(std::make_shared<std::vector<S>>(std::move(data))) {
        if (numel_from(shape_) != static_cast<std::int64_t>(data_->size())) {
            throw NumericError("tensor: shape/data size mismatch");
        }
    }

    static TensorT zeros(std::vector<std::int64_t> shape) {
        const auto n = numel_from(shape);
        return TensorT(std::move(shape), std::vector<S>(static_cast<std::size_t>(n), S(0)));
    }

    static TensorT full(std::vector<std::int64_t> shape, S value) {
        const auto n = numel_from(shape);
        return TensorT(std::move(shape), std::vector<S>(static_cast<std::size_t>(n), value));
    }

    static TensorT scalar(S value) { return TensorT({}, {value}); }

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t ndim() const { return static_cast<std::int64_t>(shape_.size()); }
    std::int64_t dim(std::size_t i) const { return shape_.at(i); }

    std::int64_t numel() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }
    bool is_scalar() const { return numel() == 1 && shape_.empty(); }

    const S* data() const { return data_->data(); }
    const std::vector<S>& vec() const { return *data_; }

    S at(std::size_t i) const { return (*data_)[i]; }
    S item() const {
        if (numel() != 1) throw NumericError("tensor: item() on non-scalar");
        return (*data_)[0];
    }

    // Same storage, new shape.
    TensorT reshape(std::vector<std::int64_t> shape) const {
        if (numel_from(shape) != numel()) throw NumericError("tensor: reshape element count mismatch");
        TensorT out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (const S v : *data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::ostringstream ss;
        ss << '[';
        for (std::size_t i = 0; i < shape_.size(); ++i) ss << (i ? "," : "") << shape_[i];
        ss << ']';
        return ss.str();
    }

    static std::int64_t numel_from(const std::vector<std::int64_t>& shape) {
        std::int64_t n = 1;
        for (const auto d : shape) n *= d;
        return n;
    }

private:
    std::vector<std::int64_t> shape_;
    std::shared_ptr<std::vector<S>> data_;
};

using Tensor = TensorT<float>;

// ---------------------------------------------------------------------------
// Kernels. These back both the tape ops and tape-free inference paths.
// ---------------------------------------------------------------------------

namespace ops {

template <typename S>
void check_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw NumericError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

template <typename S, typename F>
TensorT<S> map(const TensorT<S>& a, F f) {
    std::vector<S> out(a.vec());
    for (auto& v : out) v = f(v);
    return TensorT<S>(a.shape(), std::move(out));
}

template <typename S, typename F>
TensorT<S> zip(const TensorT<S>& a, const TensorT<S>& b, F f, const char* what) {
    check_same_shape(a, b, what);
    std::vector<S> out(a.vec());
    const S* pb = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(out[i], pb[i]);
    return TensorT<S>(a.shape(), std::move(out));
}

template <typename S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
    return zip(a, b, [](S x, S y) { return x + y; }, "add");
}

template <typename S>
TensorT<S> sub(const TensorT<S>& a, const TensorT<S>& b) {
    return zip(a, b, [](S x, S y) { return x - y; }, "sub");
}

template <typename S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
    return zip(a, b, [](S x, S y) { return x * y; }, "mul");
}

template <typename S>
TensorT<S> scale(const TensorT<S>& a, S c) {
    return map(a, [c](S x) { return x * c; });
}

// [m,k] x [k,n] -> [m,n]; ikj loop order keeps the inner loop contiguous.
template <typename S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
        throw NumericError("matmul: bad shapes " + a.shape_str() + " x " + b.shape_str());
    }
    const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<S> out(static_cast<std::size_t>(m * n), S(0));
    const S* pa = a.data();
    const S* pb = b.data();
    for (std::int64_t i = 0; i < m; ++i) {
        S* po = out.data() + i * n;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const S aik = pa[i * k + kk];
            const S* pbr = pb + kk * n;
            for (std::int64_t j = 0; j < n; ++j) po[j] += aik * pbr[j];
        }
    }
    return TensorT<S>({m, n}, std::move(out));
}

// a [m,n] transposed -> [n,m]
template <typename S>
TensorT<S> transpose(const TensorT<S>& a) {
    if (a.ndim() != 2) throw NumericError("transpose: expects rank 2");
    const std::int64_t m = a.dim(0), n = a.dim(1);
    std::vector<S> out(static_cast<std::size_t>(m * n));
    const S* pa = a.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) out[j * m + i] = pa[i * n + j];
    return TensorT<S>({n, m}, std::move(out));
}

// [m,n] + [n] broadcast over rows.
template <typename S>
TensorT<S> add_rowvec(const TensorT<S>& a, const TensorT<S>& v) {
    if (a.ndim() != 2 || v.ndim() != 1 || a.dim(1) != v.dim(0)) {
        throw NumericError("add_rowvec: bad shapes " + a.shape_str() + " + " + v.shape_str());
    }
    const std::int64_t m = a.dim(0), n = a.dim(1);
    std::vector<S> out(a.vec());
    const S* pv = v.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) out[i * n + j] += pv[j];
    return TensorT<S>({m, n}, std::move(out));
}

// Column-sum of [m,n] -> [n]; used by the rowvec-broadcast backward.
template <typename S>
TensorT<S> col_sum(const TensorT<S>& a) {
    const std::int64_t m = a.dim(0), n = a.dim(1);
    std::vector<S> out(static_cast<std::size_t>(n), S(0));
    const S* pa = a.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) out[j] += pa[i * n + j];
    return TensorT<S>({n}, std::move(out));
}

template <typename S>
TensorT<S> slice_cols(const TensorT<S>& a, std::int64_t c0, std::int64_t c1) {
    if (a.ndim() != 2 || c0 < 0 || c1 > a.dim(1) || c0 >= c1) throw NumericError("slice_cols: bad range");
    const std::int64_t m = a.dim(0), n = a.dim(1), w = c1 - c0;
    std::vector<S> out(static_cast<std::size_t>(m * w));
    const S* pa = a.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < w; ++j) out[i * w + j] = pa[i * n + c0 + j];
    return TensorT<S>({m, w}, std::move(out));
}

template <typename S>
S sum_all(const TensorT<S>& a) {
    // Accumulate in double regardless of S.
    double acc = 0.0;
    for (const S v : a.vec()) acc += static_cast<double>(v);
    return static_cast<S>(acc);
}

} // namespace ops

} // namespace msd::core
