#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "msd/core/tape.hpp"
#include "msd/core/tensor.hpp"

namespace msd::core {

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// First/second-moment state per parameter, bias-corrected update.
template <typename S>
class AdamT {
public:
    explicit AdamT(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStoreT<S>& params, const GradMapT<S>& grads) {
        ++step_count_;
        const double t = static_cast<double>(step_count_);
        const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), t);
        const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), t);
        for (const auto& name : params.names()) {
            const auto it = grads.find(name);
            if (it == grads.end()) throw NumericError("adam: missing gradient for " + name);
            const TensorT<S>& g = it->second;
            const TensorT<S>& p = params.get(name);
            if (!g.same_shape(p)) throw NumericError("adam: gradient shape mismatch for " + name);
            auto& m = moments_.try_emplace(name, Moments{TensorT<S>::zeros(p.shape()), TensorT<S>::zeros(p.shape())}).first->second;
            std::vector<S> mv(m.m.vec()), vv(m.v.vec()), pv(p.vec());
            const S* pg = g.data();
            const S b1 = cfg_.beta1, b2 = cfg_.beta2;
            for (std::size_t i = 0; i < pv.size(); ++i) {
                mv[i] = b1 * mv[i] + (S(1) - b1) * pg[i];
                vv[i] = b2 * vv[i] + (S(1) - b2) * pg[i] * pg[i];
                const S mhat = static_cast<S>(mv[i] / bc1);
                const S vhat = static_cast<S>(vv[i] / bc2);
                pv[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
            m.m = TensorT<S>(p.shape(), std::move(mv));
            m.v = TensorT<S>(p.shape(), std::move(vv));
            params.set(name, TensorT<S>(p.shape(), std::move(pv)));
        }
    }

    std::uint64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

    // Checkpoint access for resumable training.
    struct Moments {
        TensorT<S> m;
        TensorT<S> v;
    };
    const std::map<std::string, Moments>& moments() const { return moments_; }
    void restore(std::uint64_t step_count, std::map<std::string, Moments> moments) {
        step_count_ = step_count;
        moments_ = std::move(moments);
    }

private:
    AdamConfig cfg_;
    std::uint64_t step_count_ = 0;
    std::map<std::string, Moments> moments_;
};

using Adam = AdamT<float>;

} // namespace msd::core
