#pragma once

#include <string>
#include <vector>

#include "msd/core/tape.hpp"
#include "msd/core/tensor.hpp"
#include "msd/util/rng.hpp"

namespace msd::models {

// Per-frame multilayer perceptron, tanh hidden activations, linear output.
// Shared across time: callers stack frames as rows.
struct MlpSpec {
    std::string prefix;
    int in = 0;
    std::vector<int> hidden;
    int out = 0;

    std::vector<int> layer_sizes() const {
        std::vector<int> s{in};
        s.insert(s.end(), hidden.begin(), hidden.end());
        s.push_back(out);
        return s;
    }
};

inline void mlp_init(core::ParamStore& store, const MlpSpec& spec, msd::rng::Xoshiro256ss& rng) {
    const auto sizes = spec.layer_sizes();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l], fan_out = sizes[l + 1];
        const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
        std::vector<float> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (auto& v : w) v = (rng.uniformf() * 2.0f - 1.0f) * limit;
        store.add(spec.prefix + ".w" + std::to_string(l),
                  core::Tensor({fan_in, fan_out}, std::move(w)));
        store.add(spec.prefix + ".b" + std::to_string(l), core::Tensor::zeros({fan_out}));
    }
}

inline core::Tape::Var mlp_forward(core::Tape& tape, const core::ParamStore& store, const MlpSpec& spec,
                                   core::Tape::Var x) {
    const auto sizes = spec.layer_sizes();
    core::Tape::Var cur = x;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        auto w = tape.param(store, spec.prefix + ".w" + std::to_string(l));
        auto b = tape.param(store, spec.prefix + ".b" + std::to_string(l));
        cur = tape.add_rowvec(tape.matmul(cur, w), b);
        if (l + 2 < sizes.size()) cur = tape.tanh_op(cur);
    }
    return cur;
}

inline core::Tensor mlp_apply(const core::ParamStore& store, const MlpSpec& spec, const core::Tensor& x) {
    using namespace core::ops;
    const auto sizes = spec.layer_sizes();
    core::Tensor cur = x;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        cur = add_rowvec(matmul(cur, store.get(spec.prefix + ".w" + std::to_string(l))),
                         store.get(spec.prefix + ".b" + std::to_string(l)));
        if (l + 2 < sizes.size()) cur = map(cur, [](float v) { return std::tanh(v); });
    }
    return cur;
}

} // namespace msd::models
