#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdl/mask.hpp"

namespace fdl {

// Per-component 8x8 grids of empirical selection frequencies in [0,1];
// cell (u,v) of component k is (times channel 64k+8u+v was selected) / samples.
struct HeatMap {
    std::array<Eigen::Matrix<double, 8, 8>, kComponents> freq{};
    long long samples = 0;

    double at(int component, int u, int v) const { return freq[static_cast<size_t>(component)](u, v); }
    double at_global(int channel) const {
        const int k = channel / kChannelsPerComponent, c = channel % kChannelsPerComponent;
        return freq[static_cast<size_t>(k)](c / 8, c % 8);
    }
};

// decisions: one binary vector of length 192 per sample.
HeatMap heatmap_aggregate(const std::vector<std::vector<std::uint8_t>>& decisions);

// Writes <prefix>.csv ("component,u,v,frequency", exact decimal values) and
// <prefix>_y.pgm/_cb.pgm/_cr.pgm with gray = round(255 * (1 - frequency)),
// so dark cells are the frequently selected ones.
void heatmap_emit(const HeatMap& hm, const std::string& path_prefix);

HeatMap heatmap_parse_csv(const std::string& text);

// Global channel ids ranked by selection frequency (descending), ties broken
// by channel id ascending.
std::vector<int> heatmap_top_channels(const HeatMap& hm, int count);

}  // namespace fdl
