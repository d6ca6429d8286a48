#include "msd/data/enumeration.hpp"

#include <cmath>
#include <limits>

#include "msd/data/shapes2d.hpp"
#include "msd/data/timeseries.hpp"

namespace msd::data {

std::shared_ptr<const StateEnumeration> StateEnumeration::build(const DatasetManifest& manifest) {
    auto e = std::make_shared<StateEnumeration>();
    if (!manifest.generator.contains("kind")) {
        throw DataError("enumeration: dataset manifest has no generator info");
    }
    e->generator_kind_ = manifest.generator.at("kind").get<std::string>();
    e->seed_ = manifest.generator.value("seed", 0ULL);
    e->noise_scale_ = manifest.generator.value("noise_scale", 0.0);
    e->factors_ = manifest.factors;
    e->t_ = manifest.t;
    e->step_shape_ = manifest.step_shape;
    e->frame_elems_ = manifest.step_elems();
    e->state_elems_ = static_cast<std::int64_t>(manifest.t) * e->frame_elems_;
    e->configs_ = build_state_space(e->factors_);

    std::vector<float> buf(static_cast<std::size_t>(e->state_elems_) * e->configs_.size());
    for (std::size_t i = 0; i < e->configs_.size(); ++i) {
        const core::Tensor s = e->render(e->configs_[i]);
        std::copy(s.data(), s.data() + e->state_elems_,
                  buf.begin() + static_cast<std::ptrdiff_t>(i) * e->state_elems_);
    }
    e->states_ = core::Tensor({static_cast<std::int64_t>(e->configs_.size()), e->state_elems_},
                              std::move(buf));
    return e;
}

core::Tensor StateEnumeration::state_tensor(std::size_t i) const {
    std::vector<float> buf(state_data(i), state_data(i) + state_elems_);
    std::vector<std::int64_t> shape{static_cast<std::int64_t>(t_)};
    shape.insert(shape.end(), step_shape_.begin(), step_shape_.end());
    return core::Tensor(std::move(shape), std::move(buf));
}

core::Tensor StateEnumeration::render(const Config& config) const {
    if (generator_kind_ == "shapes2d16") return shapes2d::render(config);
    if (generator_kind_ == "ts24") return ts24::render(config, seed_, noise_scale_);
    throw DataError("enumeration: unknown generator kind " + generator_kind_);
}

double StateEnumeration::min_pairwise_distance() const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t s = size();
    for (std::size_t i = 0; i < s; ++i) {
        const float* a = state_data(i);
        for (std::size_t j = i + 1; j < s; ++j) {
            const float* b = state_data(j);
            double acc = 0.0;
            for (std::int64_t k = 0; k < state_elems_ && acc < best; ++k) {
                const double d = static_cast<double>(a[k]) - b[k];
                acc += d * d;
            }
            if (acc < best) best = acc;
        }
    }
    return std::sqrt(best);
}

} // namespace msd::data
