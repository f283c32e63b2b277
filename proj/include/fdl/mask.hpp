#pragma once

#include <array>
#include <string>
#include <vector>

#include "fdl/error.hpp"

namespace fdl {

inline constexpr int kComponents = 3;           // Y, Cb, Cr
inline constexpr int kChannelsPerComponent = 64;
inline constexpr int kFullChannels = 192;

const char* component_name(int component);      // "Y" | "CB" | "CR"
int component_from_name(const std::string& name);

// JPEG zigzag scan of the 8x8 frequency grid: element n is the channel index
// 8u+v of the n-th cell visited, from DC toward the highest frequency.
const std::array<int, 64>& zigzag_order();

// Per-component sets of frequency-channel indices that survive selection.
// Component index sets are kept sorted and duplicate-free.
class SelectionMask {
public:
    SelectionMask() = default;

    static SelectionMask all_pass();

    // Smallest covering square per component, trimmed from the bottom-right
    // inward in reverse row-major order until k cells remain.
    static SelectionMask square(int k_y, int k_cb, int k_cr);

    // First k channels in JPEG zigzag order per component.
    static SelectionMask triangle(int k_y, int k_cb, int k_cr);

    // Named variants: DCT-24S/T (14,5,5), DCT-48S/T (32,8,8), DCT-64S/T (44,10,10).
    static SelectionMask named(const std::string& name);

    // Mask file format: line 1 "FDMASK 1", then "<Y|CB|CR> <index>" lines,
    // '#' comments allowed. Errors carry the offending line number.
    static SelectionMask parse(const std::string& text);

    static SelectionMask from_components(std::vector<int> y, std::vector<int> cb, std::vector<int> cr);

    // Build from a set of global channel ids (64 * component + index).
    static SelectionMask from_globals(const std::vector<int>& globals);

    const std::vector<int>& component(int k) const { return sets_[static_cast<size_t>(k)]; }
    int total() const;
    bool contains(int component, int index) const;
    bool is_all_pass() const { return total() == kFullChannels; }

    // Global channel ids in tensor order: Y ascending, then Cb, then Cr.
    std::vector<int> global_channels() const;

    std::string serialize() const;

    bool operator==(const SelectionMask& o) const { return sets_ == o.sets_; }

private:
    std::array<std::vector<int>, kComponents> sets_;
};

}  // namespace fdl
