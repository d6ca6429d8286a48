#pragma once

#include <memory>

#include "msd/data/enumeration.hpp"
#include "msd/models/contract.hpp"

namespace msd::models {

// Perfectly disentangled reference model over an enumerated generator: one
// latent channel per factor carrying the factor's label index, constant over
// time. encode() is a nearest-state lookup; decode() rounds the channel
// means back to a configuration and renders it. Metric and LES pipelines
// should score (nearly) perfectly against it.
class AnalyticModel : public Model {
public:
    explicit AnalyticModel(std::shared_ptr<const data::StateEnumeration> enumeration);

    std::string kind() const override { return "analytic"; }
    LatentInfo latent_info() const override;
    core::Tensor encode(const core::Tensor& x) const override;
    core::Tensor decode(const core::Tensor& z) const override;

    const data::StateEnumeration& enumeration() const { return *enum_; }

private:
    std::shared_ptr<const data::StateEnumeration> enum_;
};

} // namespace msd::models
