#pragma once

#include <filesystem>
#include <string>

#include "prenet/dataset.hpp"
#include "prenet/model.hpp"

namespace prenet {

/// Everything needed to score new data: the trained model, the input
/// standardization, and the (already standardized) partner pools.
///
/// Serialized as JSON; layout in README.md. Doubles are written with
/// round-trip precision so save -> load is bit-exact.
struct Checkpoint {
  Model model;
  Standardizer standardizer;
  TrainingPools pools;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace prenet
