#pragma once

#include <filesystem>

#include "alrn/model.hpp"

namespace alrn {

// A checkpoint directory holds header.json (the model structure and
// buffer file list) plus one tensor file per parameter buffer. Writes
// are bitwise deterministic for identical parameters.
void save_checkpoint(const std::filesystem::path& dir, const ParameterSet& params,
                     const ModelConfig& config);

struct Checkpoint {
  ParameterSet params;
  ModelConfig config;
};

Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace alrn
