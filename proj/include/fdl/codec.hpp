#pragma once

#include <string>
#include <vector>

#include "fdl/color.hpp"
#include "fdl/dct.hpp"
#include "fdl/image.hpp"
#include "fdl/mask.hpp"
#include "fdl/tensor.hpp"

namespace fdl {

// Grid of 8x8 coefficient (or pixel) blocks covering one plane.
struct BlockGrid {
    int rows = 0;
    int cols = 0;
    std::vector<Block8> blocks;  // row-major

    BlockGrid() = default;
    BlockGrid(int r, int c) : rows(r), cols(c), blocks(static_cast<size_t>(r) * c, Block8::Zero()) {}

    Block8& at(int r, int c) { return blocks[static_cast<size_t>(r) * cols + c]; }
    const Block8& at(int r, int c) const { return blocks[static_cast<size_t>(r) * cols + c]; }
};

// Blockwise forward DCT of a plane (extents must be multiples of 8).
BlockGrid dct_plane(const Eigen::ArrayXXd& plane);
// Blockwise inverse DCT back to a plane.
Eigen::ArrayXXd idct_plane(const BlockGrid& grid);

// Frequency-channel tensor: data is (H/8) x (W/8) x C with C <= 192, and
// channels[i] records the global channel id (64 * component + 8u + v) packed
// at position i. Components appear in Y, Cb, Cr order.
struct ChannelTensor {
    Tensor data;
    std::vector<int> channels;

    int channel_count() const { return static_cast<int>(channels.size()); }
};

// t(by, bx, 8u+v) = grid(by, bx)(u, v). Bijective with unpack_channels.
Tensor pack_channels(const BlockGrid& grid);
BlockGrid unpack_channels(const Tensor& t);

// Per-channel running statistics (Welford). Variance is M2/n (population).
class ChannelStats {
public:
    ChannelStats() = default;
    explicit ChannelStats(int channels);

    void update(const Tensor& sample);  // every spatial position of every channel
    void finalize();                    // requires n >= 2; further updates rejected
    bool finalized() const { return finalized_; }

    int channels() const { return static_cast<int>(mean_.size()); }
    long long count() const { return n_; }
    double mean(int c) const { return mean_[static_cast<size_t>(c)]; }
    double variance(int c) const;

    // Text format: line 1 "FDSTATS 1 <channel_count>", then one line per
    // channel "<index> <mean> <variance>" in full double precision.
    std::string serialize() const;
    static ChannelStats parse(const std::string& text);

private:
    std::vector<double> mean_;
    std::vector<double> m2_;
    long long n_ = 0;
    bool finalized_ = false;
    bool from_file_ = false;
    std::vector<double> file_variance_;
};

inline constexpr double kStandardizeEpsilon = 1e-5;

// Full pre-processing pipeline: edge-replicate pad to multiples of 8, YCbCr
// conversion, blockwise DCT, per-component packing, Y|Cb|Cr concatenation,
// channel selection, then optional per-channel standardization
// (x - mean) / sqrt(variance + 1e-5).
ChannelTensor encode_image(const RgbImage& img, const SelectionMask& mask, const ChannelStats* stats = nullptr);
ChannelTensor encode_image(const RgbImage& img);  // all-pass, no stats

// Inverse pipeline for verification; requires all 192 channels, no stats.
YcbcrPlanes decode_planes(const ChannelTensor& ct);
RgbImage decode_image(const ChannelTensor& ct);

}  // namespace fdl
