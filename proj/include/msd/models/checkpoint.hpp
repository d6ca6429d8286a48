#pragma once

#include <memory>
#include <string>

#include "msd/models/contract.hpp"
#include "msd/models/seq_models.hpp"

// Checkpoint layout: manifest.json (model kind, geometry, hyperparameters,
// parameter table, model extra state) + params.bin (float32 blobs in
// registration order, little-endian). Save -> load -> save is
// byte-identical.

namespace msd::models {

void save_checkpoint(const TrainableModel& model, const CoderGeometry& geom, const std::string& dir);

struct LoadedCheckpoint {
    std::unique_ptr<TrainableModel> model;
    CoderGeometry geometry;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

} // namespace msd::models
