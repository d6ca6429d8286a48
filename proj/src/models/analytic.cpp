#include "msd/models/analytic.hpp"

#include <cmath>
#include <limits>

namespace msd::models {

AnalyticModel::AnalyticModel(std::shared_ptr<const data::StateEnumeration> enumeration)
    : enum_(std::move(enumeration)) {}

LatentInfo AnalyticModel::latent_info() const {
    LatentInfo info;
    info.channels = static_cast<int>(enum_->factors().size());
    for (const auto& f : enum_->factors()) {
        info.roles.push_back(f.kind == data::FactorKind::Static ? ChannelRole::Static
                                                                : ChannelRole::Dynamic);
    }
    return info;
}

core::Tensor AnalyticModel::encode(const core::Tensor& x) const {
    if (x.numel() != enum_->state_elems()) throw NumericError("analytic encode: sample shape mismatch");
    const float* px = x.data();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < enum_->size(); ++i) {
        const float* ps = enum_->state_data(i);
        double acc = 0.0;
        for (std::int64_t k = 0; k < enum_->state_elems() && acc < best; ++k) {
            const double d = static_cast<double>(px[k]) - ps[k];
            acc += d * d;
        }
        if (acc < best) { // strict: ties keep the lowest enumeration index
            best = acc;
            best_i = i;
        }
    }
    const auto& cfg = enum_->configs()[best_i];
    const auto t = static_cast<std::int64_t>(enum_->t());
    const auto k = static_cast<std::int64_t>(cfg.size());
    std::vector<float> z(static_cast<std::size_t>(t * k));
    for (std::int64_t r = 0; r < t; ++r)
        for (std::int64_t j = 0; j < k; ++j) z[static_cast<std::size_t>(r * k + j)] = static_cast<float>(cfg[static_cast<std::size_t>(j)]);
    return core::Tensor({t, k}, std::move(z));
}

core::Tensor AnalyticModel::decode(const core::Tensor& z) const {
    const auto& factors = enum_->factors();
    if (z.ndim() != 2 || z.dim(1) != static_cast<std::int64_t>(factors.size())) {
        throw NumericError("analytic decode: latent shape mismatch");
    }
    const std::int64_t t = z.dim(0), k = z.dim(1);
    data::Config cfg(factors.size());
    for (std::int64_t j = 0; j < k; ++j) {
        double mean = 0.0;
        for (std::int64_t r = 0; r < t; ++r) mean += z.data()[r * k + j];
        mean /= static_cast<double>(t);
        const auto card = static_cast<std::int64_t>(factors[static_cast<std::size_t>(j)].cardinality());
        auto v = static_cast<std::int64_t>(std::llround(mean));
        v = std::max<std::int64_t>(0, std::min(card - 1, v));
        cfg[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(v);
    }
    return enum_->render(cfg);
}

} // namespace msd::models
