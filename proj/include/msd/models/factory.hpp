#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "msd/models/contract.hpp"
#include "msd/models/seq_models.hpp"

namespace msd::models {

// Trainable model kinds: ae, vae, beta_vae, sparse_ae, skd, ssm_skd.
// Hyperparameters are validated against the per-model schema: unknown keys
// are rejected, ranges enforced, defaults filled in.
std::unique_ptr<TrainableModel> build_model(const std::string& kind, const nlohmann::json& params,
                                            const CoderGeometry& geom);

// Model-param json with schema defaults applied (validation included).
nlohmann::json normalize_model_params(const std::string& kind, const nlohmann::json& params);

bool is_known_model(const std::string& kind);

} // namespace msd::models
