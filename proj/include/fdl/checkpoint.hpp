#pragma once

#include <optional>
#include <string>

#include "fdl/codec.hpp"
#include "fdl/mask.hpp"
#include "fdl/model.hpp"

namespace fdl {

// A checkpoint is a directory: manifest.txt with the model configuration and
// tensor roles, one FDT1 file per parameter tensor, and the mask/stats files
// the training pipeline used (when any).
struct Checkpoint {
    Model model;
    std::optional<SelectionMask> mask;
    std::optional<ChannelStats> stats;
    bool scatter_to_full = false;
};

void save_checkpoint(const std::string& dir, const Model& model, const SelectionMask* mask,
                     const ChannelStats* stats, bool scatter_to_full);

Checkpoint load_checkpoint(const std::string& dir);

}  // namespace fdl
