#include "fdl/mask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdl {

const char* component_name(int component) {
    switch (component) {
        case 0: return "Y";
        case 1: return "CB";
        case 2: return "CR";
    }
    throw ConfigError("component index out of range");
}

int component_from_name(const std::string& name) {
    if (name == "Y") return 0;
    if (name == "CB") return 1;
    if (name == "CR") return 2;
    return -1;
}

const std::array<int, 64>& zigzag_order() {
    static const std::array<int, 64> order = [] {
        std::array<int, 64> z{};
        int u = 0, v = 0;
        bool up = true;
        for (int n = 0; n < 64; ++n) {
            z[static_cast<size_t>(n)] = 8 * u + v;
            if (up) {
                if (v == 7) { ++u; up = false; }
                else if (u == 0) { ++v; up = false; }
                else { --u; ++v; }
            } else {
                if (u == 7) { ++v; up = true; }
                else if (v == 0) { ++u; up = true; }
                else { ++u; --v; }
            }
        }
        return z;
    }();
    return order;
}

namespace {

void check_count(int k) {
    if (k < 0 || k > kChannelsPerComponent) throw ConfigError("mask: per-component count must be in 0..64");
}

std::vector<int> square_prefix(int k) {
    check_count(k);
    if (k == 0) return {};
    // Grow the covering square one ring at a time (ring r = cells with
    // max(u,v) == r), filling each incoming ring in row-major order. Prefixes
    // of this order are upper-left squares with bottom-right cells missing,
    // and masks nest monotonically in k.
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    for (int r = 0; r < 8 && static_cast<int>(out.size()) < k; ++r) {
        for (int u = 0; u < r && static_cast<int>(out.size()) < k; ++u) out.push_back(8 * u + r);
        for (int v = 0; v <= r && static_cast<int>(out.size()) < k; ++v) out.push_back(8 * r + v);
    }
    return out;
}

std::vector<int> triangle_prefix(int k) {
    check_count(k);
    const auto& z = zigzag_order();
    std::vector<int> out(z.begin(), z.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SelectionMask SelectionMask::all_pass() {
    std::vector<int> full(kChannelsPerComponent);
    for (int i = 0; i < kChannelsPerComponent; ++i) full[static_cast<size_t>(i)] = i;
    return from_components(full, full, full);
}

SelectionMask SelectionMask::square(int k_y, int k_cb, int k_cr) {
    return from_components(square_prefix(k_y), square_prefix(k_cb), square_prefix(k_cr));
}

SelectionMask SelectionMask::triangle(int k_y, int k_cb, int k_cr) {
    return from_components(triangle_prefix(k_y), triangle_prefix(k_cb), triangle_prefix(k_cr));
}

SelectionMask SelectionMask::named(const std::string& name) {
    int ky, kcb, kcr;
    if (name.rfind("DCT-24", 0) == 0) { ky = 14; kcb = 5; kcr = 5; }
    else if (name.rfind("DCT-48", 0) == 0) { ky = 32; kcb = 8; kcr = 8; }
    else if (name.rfind("DCT-64", 0) == 0) { ky = 44; kcb = 10; kcr = 10; }
    else throw ConfigError("unknown mask name '" + name + "'");
    if (name.size() != 7) throw ConfigError("unknown mask name '" + name + "'");
    const char shape = name.back();
    if (shape == 'S') return square(ky, kcb, kcr);
    if (shape == 'T') return triangle(ky, kcb, kcr);
    throw ConfigError("unknown mask name '" + name + "'");
}

SelectionMask SelectionMask::from_components(std::vector<int> y, std::vector<int> cb, std::vector<int> cr) {
    SelectionMask m;
    m.sets_ = {std::move(y), std::move(cb), std::move(cr)};
    for (auto& set : m.sets_) {
        std::sort(set.begin(), set.end());
        for (size_t i = 0; i < set.size(); ++i) {
            if (set[i] < 0 || set[i] >= kChannelsPerComponent)
                throw ConfigError("mask: channel index out of range");
            if (i > 0 && set[i] == set[i - 1]) throw ConfigError("mask: duplicate channel index");
        }
    }
    return m;
}

SelectionMask SelectionMask::from_globals(const std::vector<int>& globals) {
    std::array<std::vector<int>, kComponents> sets;
    for (int g : globals) {
        if (g < 0 || g >= kFullChannels) throw ConfigError("mask: global channel out of range");
        sets[static_cast<size_t>(g / kChannelsPerComponent)].push_back(g % kChannelsPerComponent);
    }
    return from_components(sets[0], sets[1], sets[2]);
}

int SelectionMask::total() const {
    int n = 0;
    for (const auto& s : sets_) n += static_cast<int>(s.size());
    return n;
}

bool SelectionMask::contains(int component, int index) const {
    const auto& s = sets_[static_cast<size_t>(component)];
    return std::binary_search(s.begin(), s.end(), index);
}

std::vector<int> SelectionMask::global_channels() const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(total()));
    for (int k = 0; k < kComponents; ++k)
        for (int idx : sets_[static_cast<size_t>(k)]) out.push_back(kChannelsPerComponent * k + idx);
    return out;
}

SelectionMask SelectionMask::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    std::array<std::vector<int>, kComponents> sets;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank/comment line
        if (!header_seen) {
            int version = 0;
            if (first != "FDMASK" || !(ls >> version) || version != 1)
                throw ParseError("mask line " + std::to_string(lineno) + ": expected header 'FDMASK 1'");
            header_seen = true;
            continue;
        }
        const int comp = component_from_name(first);
        if (comp < 0)
            throw ParseError("mask line " + std::to_string(lineno) + ": unknown component tag '" + first + "'");
        int idx;
        if (!(ls >> idx))
            throw ParseError("mask line " + std::to_string(lineno) + ": missing channel index");
        if (idx < 0 || idx >= kChannelsPerComponent)
            throw ParseError("mask line " + std::to_string(lineno) + ": channel index out of range");
        std::string extra;
        if (ls >> extra) throw ParseError("mask line " + std::to_string(lineno) + ": trailing tokens");
        auto& set = sets[static_cast<size_t>(comp)];
        if (std::find(set.begin(), set.end(), idx) != set.end())
            throw ParseError("mask line " + std::to_string(lineno) + ": duplicate channel " + first + " " +
                             std::to_string(idx));
        set.push_back(idx);
    }
    if (!header_seen) throw ParseError("mask: missing 'FDMASK 1' header");
    return from_components(sets[0], sets[1], sets[2]);
}

std::string SelectionMask::serialize() const {
    std::string out = "FDMASK 1\n";
    for (int k = 0; k < kComponents; ++k)
        for (int idx : sets_[static_cast<size_t>(k)])
            out += std::string(component_name(k)) + " " + std::to_string(idx) + "\n";
    return out;
}

}  // namespace fdl
