#include "fdl/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fdl/image.hpp"

namespace fdl {

HeatMap heatmap_aggregate(const std::vector<std::vector<std::uint8_t>>& decisions) {
    if (decisions.empty()) throw StateError("heatmap: no decision vectors to aggregate");
    HeatMap hm;
    for (auto& f : hm.freq) f.setZero();
    for (const auto& d : decisions) {
        if (d.size() != kFullChannels) throw ShapeError("heatmap: decision vector must have 192 entries");
        for (int ch = 0; ch < kFullChannels; ++ch) {
            if (d[(size_t)ch] == 0) continue;
            const int k = ch / kChannelsPerComponent, c = ch % kChannelsPerComponent;
            hm.freq[(size_t)k](c / 8, c % 8) += 1.0;
        }
    }
    hm.samples = static_cast<long long>(decisions.size());
    for (auto& f : hm.freq) f /= static_cast<double>(hm.samples);
    return hm;
}

void heatmap_emit(const HeatMap& hm, const std::string& path_prefix) {
    std::string csv = "component,u,v,frequency\n";
    char buf[80];
    for (int k = 0; k < kComponents; ++k)
        for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v) {
                std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g\n", component_name(k), u, v, hm.at(k, u, v));
                csv += buf;
            }
    write_file_text(path_prefix + ".csv", csv);

    const char* suffix[kComponents] = {"_y.pgm", "_cb.pgm", "_cr.pgm"};
    for (int k = 0; k < kComponents; ++k) {
        std::vector<std::uint8_t> gray(64);
        for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v)
                gray[static_cast<size_t>(8 * u + v)] =
                    static_cast<std::uint8_t>(std::floor(255.0 * (1.0 - hm.at(k, u, v)) + 0.5));
        pgm_write_file(path_prefix + suffix[k], 8, 8, gray);
    }
}

HeatMap heatmap_parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "component,u,v,frequency")
        throw ParseError("heatmap csv: bad header");
    HeatMap hm;
    for (auto& f : hm.freq) f.setZero();
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::string comp;
        int u, v;
        double f;
        if (!(ls >> comp >> u >> v >> f)) throw ParseError("heatmap csv: bad row '" + line + "'");
        const int k = component_from_name(comp);
        if (k < 0 || u < 0 || u > 7 || v < 0 || v > 7) throw ParseError("heatmap csv: bad row '" + line + "'");
        hm.freq[(size_t)k](u, v) = f;
        ++rows;
    }
    if (rows != kFullChannels) throw ParseError("heatmap csv: expected 192 rows");
    return hm;
}

std::vector<int> heatmap_top_channels(const HeatMap& hm, int count) {
    if (count < 0 || count > kFullChannels) throw ConfigError("heatmap: top-channel count out of range");
    std::vector<int> ids(kFullChannels);
    for (int i = 0; i < kFullChannels; ++i) ids[(size_t)i] = i;
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        const double fa = hm.at_global(a), fb = hm.at_global(b);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    ids.resize(static_cast<size_t>(count));
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace fdl
