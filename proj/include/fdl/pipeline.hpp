#pragma once

#include <string>

#include "fdl/codec.hpp"
#include "fdl/dataset.hpp"
#include "fdl/model.hpp"

namespace fdl {

// Encodes every manifest sample through the frequency pipeline. With
// scatter_to_full the masked channels are placed at their global positions in
// a 192-channel tensor (zeros elsewhere), so a full-width model can consume a
// pruned input; otherwise channels are packed compactly.
LabeledData load_freq_dataset(const DatasetManifest& manifest, const std::string& base_dir,
                              const SelectionMask& mask, const ChannelStats* stats, bool scatter_to_full,
                              int threads = 1);

// Loads samples as spatial RGB tensors, box-downsampled `downsample_steps`
// times, standardized per RGB channel when stats are given.
LabeledData load_spatial_dataset(const DatasetManifest& manifest, const std::string& base_dir,
                                 int downsample_steps, const ChannelStats* rgb_stats, int threads = 1);

// Welford stats over the training images, per masked frequency channel.
ChannelStats compute_freq_stats(const DatasetManifest& manifest, const std::string& base_dir,
                                const SelectionMask& mask);

// Per-RGB-channel stats after downsampling, for the spatial baseline.
ChannelStats compute_rgb_stats(const DatasetManifest& manifest, const std::string& base_dir,
                               int downsample_steps);

// Mean energy (squared coefficient) per frequency channel over a dataset,
// computed through encode_image with an all-pass mask. Index = global id.
Eigen::ArrayXd channel_energy(const DatasetManifest& manifest, const std::string& base_dir);

}  // namespace fdl
