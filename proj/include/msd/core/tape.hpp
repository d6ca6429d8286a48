#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msd/core/tensor.hpp"

namespace msd::core {

// Named parameter registry. Ordering is the registration order and drives
// every deterministic iteration (optimizer updates, checkpoint layout).
template <typename S>
class ParamStoreT {
public:
    void add(const std::string& name, TensorT<S> value) {
        if (index_.count(name)) throw NumericError("param store: duplicate parameter " + name);
        index_[name] = names_.size();
        names_.push_back(name);
        values_.push_back(std::move(value));
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    const TensorT<S>& get(const std::string& name) const { return values_[index_.at(name)]; }

    void set(const std::string& name, TensorT<S> value) {
        auto& slot = values_[index_.at(name)];
        if (!slot.same_shape(value)) throw NumericError("param store: shape change for " + name);
        slot = std::move(value);
    }

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::vector<TensorT<S>> values_;
    std::map<std::string, std::size_t> index_;
};

template <typename S>
using GradMapT = std::map<std::string, TensorT<S>>;

// Reverse-mode tape. Append-only, so node order is already topological and
// the backward sweep visits each node exactly once. A tape instance is
// confined to one thread and one forward pass.
template <typename S>
class TapeT {
public:
    struct Var {
        int id = -1;
    };

    using Tensor = TensorT<S>;
    using Vjp = std::function<std::vector<Tensor>(const Tensor& gout)>;

    // Constant leaf; no gradient is propagated into it.
    Var input(Tensor value) { return push(std::move(value), {}, nullptr); }

    Var param(const ParamStoreT<S>& store, const std::string& name) {
        Var v = push(store.get(name), {}, nullptr);
        param_of_node_[v.id] = name;
        return v;
    }

    // Extension point for ops with hand-written backward rules. `vjp` must
    // return one gradient tensor per input, each shaped like that input.
    Var custom(Tensor value, std::vector<Var> inputs, Vjp vjp) {
        if (!value.all_finite()) throw NumericError("tape: non-finite value produced by custom op");
        std::vector<int> ids;
        ids.reserve(inputs.size());
        for (const Var v : inputs) ids.push_back(v.id);
        return push(std::move(value), std::move(ids), std::move(vjp));
    }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }

    // ---- op library -------------------------------------------------------

    Var add(Var a, Var b) {
        Tensor out = ops::add(value(a), value(b));
        return custom(std::move(out), {a, b}, [](const Tensor& g) { return std::vector<Tensor>{g, g}; });
    }

    Var sub(Var a, Var b) {
        Tensor out = ops::sub(value(a), value(b));
        return custom(std::move(out), {a, b}, [](const Tensor& g) {
            return std::vector<Tensor>{g, ops::scale(g, S(-1))};
        });
    }

    Var mul(Var a, Var b) {
        Tensor va = value(a), vb = value(b);
        Tensor out = ops::mul(va, vb);
        return custom(std::move(out), {a, b}, [va, vb](const Tensor& g) {
            return std::vector<Tensor>{ops::mul(g, vb), ops::mul(g, va)};
        });
    }

    Var scale(Var a, S c) {
        Tensor out = ops::scale(value(a), c);
        return custom(std::move(out), {a}, [c](const Tensor& g) {
            return std::vector<Tensor>{ops::scale(g, c)};
        });
    }

    Var matmul(Var a, Var b) {
        Tensor va = value(a), vb = value(b);
        Tensor out = ops::matmul(va, vb);
        return custom(std::move(out), {a, b}, [va, vb](const Tensor& g) {
            return std::vector<Tensor>{ops::matmul(g, ops::transpose(vb)),
                                       ops::matmul(ops::transpose(va), g)};
        });
    }

    Var add_rowvec(Var a, Var v) {
        Tensor out = ops::add_rowvec(value(a), value(v));
        return custom(std::move(out), {a, v}, [](const Tensor& g) {
            return std::vector<Tensor>{g, ops::col_sum(g)};
        });
    }

    Var slice_cols(Var a, std::int64_t c0, std::int64_t c1) {
        Tensor va = value(a);
        Tensor out = ops::slice_cols(va, c0, c1);
        const std::int64_t m = va.dim(0), n = va.dim(1), w = c1 - c0;
        return custom(std::move(out), {a}, [m, n, w, c0](const Tensor& g) {
            std::vector<S> gz(static_cast<std::size_t>(m * n), S(0));
            const S* pg = g.data();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < w; ++j) gz[i * n + c0 + j] = pg[i * w + j];
            return std::vector<Tensor>{Tensor({m, n}, std::move(gz))};
        });
    }

    Var tanh_op(Var a) {
        Tensor out = ops::map(value(a), [](S x) { return std::tanh(x); });
        return custom(out, {a}, [out](const Tensor& g) {
            return std::vector<Tensor>{ops::zip(g, out, [](S gv, S y) { return gv * (S(1) - y * y); }, "tanh'")};
        });
    }

    Var relu(Var a) {
        Tensor va = value(a);
        Tensor out = ops::map(va, [](S x) { return x > S(0) ? x : S(0); });
        return custom(std::move(out), {a}, [va](const Tensor& g) {
            return std::vector<Tensor>{ops::zip(g, va, [](S gv, S x) { return x > S(0) ? gv : S(0); }, "relu'")};
        });
    }

    Var exp_op(Var a) {
        Tensor out = ops::map(value(a), [](S x) { return std::exp(x); });
        return custom(out, {a}, [out](const Tensor& g) {
            return std::vector<Tensor>{ops::mul(g, out)};
        });
    }

    Var square(Var a) {
        Tensor va = value(a);
        Tensor out = ops::map(va, [](S x) { return x * x; });
        return custom(std::move(out), {a}, [va](const Tensor& g) {
            return std::vector<Tensor>{ops::zip(g, va, [](S gv, S x) { return gv * S(2) * x; }, "square'")};
        });
    }

    Var abs_op(Var a) {
        Tensor va = value(a);
        Tensor out = ops::map(va, [](S x) { return std::abs(x); });
        return custom(std::move(out), {a}, [va](const Tensor& g) {
            // d|x|/dx at 0 taken as 0.
            return std::vector<Tensor>{ops::zip(g, va, [](S gv, S x) {
                return x > S(0) ? gv : (x < S(0) ? -gv : S(0));
            }, "abs'")};
        });
    }

    Var sum(Var a) {
        Tensor va = value(a);
        Tensor out = Tensor::scalar(ops::sum_all(va));
        auto shape = va.shape();
        return custom(std::move(out), {a}, [shape](const Tensor& g) {
            return std::vector<Tensor>{Tensor::full(shape, g.item())};
        });
    }

    Var mean(Var a) { return scale(sum(a), S(1) / static_cast<S>(value(a).numel())); }

    Var mse(Var pred, Var target) { return mean(square(sub(pred, target))); }

    // ---- backward ---------------------------------------------------------

    // Gradient of a scalar loss for every parameter registered in `store`;
    // parameters the loss never touched get zero gradients.
    GradMapT<S> backward(Var loss, const ParamStoreT<S>& store) const {
        if (!value(loss).is_scalar()) throw NumericError("backward: loss must be scalar");
        std::vector<std::optional<Tensor>> grads(nodes_.size());
        grads[loss.id] = Tensor::scalar(S(1));
        for (int id = loss.id; id >= 0; --id) {
            if (!grads[id].has_value() || !nodes_[id].vjp) continue;
            const auto in_grads = nodes_[id].vjp(*grads[id]);
            const auto& ins = nodes_[id].inputs;
            if (in_grads.size() != ins.size()) throw NumericError("backward: vjp arity mismatch");
            for (std::size_t j = 0; j < ins.size(); ++j) {
                if (!in_grads[j].all_finite()) throw NumericError("backward: non-finite gradient");
                if (!in_grads[j].same_shape(nodes_[ins[j]].value)) {
                    throw NumericError("backward: gradient shape mismatch");
                }
                if (grads[ins[j]].has_value()) {
                    grads[ins[j]] = ops::add(*grads[ins[j]], in_grads[j]);
                } else {
                    grads[ins[j]] = in_grads[j];
                }
            }
        }
        GradMapT<S> out;
        for (const auto& name : store.names()) out.emplace(name, TensorT<S>::zeros(store.get(name).shape()));
        for (const auto& [id, name] : param_of_node_) {
            if (grads[id].has_value()) out[name] = ops::add(out[name], *grads[id]);
        }
        return out;
    }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::vector<int> inputs;
        Vjp vjp; // null for leaves
    };

    Var push(Tensor value, std::vector<int> inputs, Vjp vjp) {
        nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(vjp)});
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<Node> nodes_;
    std::map<int, std::string> param_of_node_;
};

using Tape = TapeT<float>;
using ParamStore = ParamStoreT<float>;
using GradMap = GradMapT<float>;

} // namespace msd::core
