#include "fdl/codec.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace fdl {

BlockGrid dct_plane(const Eigen::ArrayXXd& plane) {
    if (plane.rows() % 8 != 0 || plane.cols() % 8 != 0)
        throw ShapeError("dct_plane: extents must be multiples of 8");
    BlockGrid grid(static_cast<int>(plane.rows()) / 8, static_cast<int>(plane.cols()) / 8);
    for (int by = 0; by < grid.rows; ++by)
        for (int bx = 0; bx < grid.cols; ++bx)
            grid.at(by, bx) = dct8x8(plane.block<8, 8>(8 * by, 8 * bx).matrix());
    return grid;
}

Eigen::ArrayXXd idct_plane(const BlockGrid& grid) {
    Eigen::ArrayXXd plane(8 * grid.rows, 8 * grid.cols);
    for (int by = 0; by < grid.rows; ++by)
        for (int bx = 0; bx < grid.cols; ++bx)
            plane.block<8, 8>(8 * by, 8 * bx) = idct8x8(grid.at(by, bx)).array();
    return plane;
}

Tensor pack_channels(const BlockGrid& grid) {
    if (grid.rows <= 0 || grid.cols <= 0) throw ShapeError("pack_channels: empty grid");
    Tensor t({grid.rows, grid.cols, kChannelsPerComponent});
    for (int by = 0; by < grid.rows; ++by)
        for (int bx = 0; bx < grid.cols; ++bx) {
            const Block8& b = grid.at(by, bx);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) t(by, bx, 8 * u + v) = b(u, v);
        }
    return t;
}

BlockGrid unpack_channels(const Tensor& t) {
    if (t.rank() != 3 || t.dim(2) != kChannelsPerComponent)
        throw ShapeError("unpack_channels: tensor must be (H/8)x(W/8)x64");
    BlockGrid grid(t.dim(0), t.dim(1));
    for (int by = 0; by < grid.rows; ++by)
        for (int bx = 0; bx < grid.cols; ++bx) {
            Block8& b = grid.at(by, bx);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) b(u, v) = t(by, bx, 8 * u + v);
        }
    return grid;
}

ChannelStats::ChannelStats(int channels) {
    if (channels <= 0) throw ConfigError("stats: channel count must be positive");
    mean_.assign(static_cast<size_t>(channels), 0.0);
    m2_.assign(static_cast<size_t>(channels), 0.0);
}

void ChannelStats::update(const Tensor& sample) {
    if (finalized_) throw StateError("stats: update after finalize");
    if (sample.rank() != 3 || sample.dim(2) != channels())
        throw ShapeError("stats: sample channel count mismatch");
    const int h = sample.dim(0), w = sample.dim(1), c = sample.dim(2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            ++n_;  // counts observations per channel; all channels see the same n
            for (int ch = 0; ch < c; ++ch) {
                const double v = sample(y, x, ch);
                const double delta = v - mean_[(size_t)ch];
                mean_[(size_t)ch] += delta / static_cast<double>(n_);
                m2_[(size_t)ch] += delta * (v - mean_[(size_t)ch]);
            }
        }
}

void ChannelStats::finalize() {
    if (finalized_) throw StateError("stats: finalize called twice");
    if (n_ < 2) throw StateError("stats: need at least 2 observations to finalize");
    finalized_ = true;
}

double ChannelStats::variance(int c) const {
    if (from_file_) return file_variance_[static_cast<size_t>(c)];
    if (n_ == 0) return 0.0;
    return m2_[static_cast<size_t>(c)] / static_cast<double>(n_);
}

std::string ChannelStats::serialize() const {
    if (!finalized_) throw StateError("stats: serialize before finalize");
    std::string out = "FDSTATS 1 " + std::to_string(channels()) + "\n";
    char buf[96];
    for (int c = 0; c < channels(); ++c) {
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", c, mean(c), variance(c));
        out += buf;
    }
    return out;
}

ChannelStats ChannelStats::parse(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int version = 0, count = 0;
    if (!(in >> tag >> version >> count) || tag != "FDSTATS" || version != 1)
        throw ParseError("stats: expected header 'FDSTATS 1 <channel_count>'");
    if (count <= 0) throw ParseError("stats: nonpositive channel count");
    ChannelStats s(count);
    s.from_file_ = true;
    s.file_variance_.assign(static_cast<size_t>(count), 0.0);
    for (int i = 0; i < count; ++i) {
        int idx;
        double mean, var;
        if (!(in >> idx >> mean >> var)) throw ParseError("stats: truncated at channel " + std::to_string(i));
        if (idx != i) throw ParseError("stats: channel index out of order at " + std::to_string(idx));
        if (var < 0) throw ParseError("stats: negative variance at channel " + std::to_string(i));
        s.mean_[(size_t)i] = mean;
        s.file_variance_[(size_t)i] = var;
    }
    s.n_ = 2;  // parsed stats are final; count is not preserved by the format
    s.finalized_ = true;
    return s;
}

namespace {

void standardize(Tensor& data, const ChannelStats& stats) {
    const int h = data.dim(0), w = data.dim(1), c = data.dim(2);
    for (int ch = 0; ch < c; ++ch) {
        const double m = stats.mean(ch);
        const double s = std::sqrt(stats.variance(ch) + kStandardizeEpsilon);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) data(y, x, ch) = (data(y, x, ch) - m) / s;
    }
}

}  // namespace

ChannelTensor encode_image(const RgbImage& img, const SelectionMask& mask, const ChannelStats* stats) {
    const RgbImage padded = pad_to_multiple_of_8(img);
    const YcbcrPlanes planes = rgb_to_ycbcr(padded);
    const int bh = padded.height / 8, bw = padded.width / 8;

    ChannelTensor out;
    out.channels = mask.global_channels();
    const int total = static_cast<int>(out.channels.size());
    if (total == 0) throw ConfigError("encode_image: empty selection mask");
    if (stats && stats->channels() != total)
        throw ConfigError("encode_image: stats channel count (" + std::to_string(stats->channels()) +
                          ") does not match mask (" + std::to_string(total) + ")");
    out.data = Tensor({bh, bw, total});

    const Eigen::ArrayXXd* plane_ptr[kComponents] = {&planes.y, &planes.cb, &planes.cr};
    int pos = 0;
    for (int k = 0; k < kComponents; ++k) {
        const auto& selected = mask.component(k);
        if (selected.empty()) continue;
        const BlockGrid grid = dct_plane(*plane_ptr[k]);
        const Tensor packed = pack_channels(grid);
        for (int idx : selected) {
            for (int by = 0; by < bh; ++by)
                for (int bx = 0; bx < bw; ++bx) out.data(by, bx, pos) = packed(by, bx, idx);
            ++pos;
        }
    }
    if (stats) standardize(out.data, *stats);
    return out;
}

ChannelTensor encode_image(const RgbImage& img) { return encode_image(img, SelectionMask::all_pass(), nullptr); }

YcbcrPlanes decode_planes(const ChannelTensor& ct) {
    if (ct.channel_count() != kFullChannels)
        throw ShapeError("decode: all 192 channels are required");
    const auto expected = SelectionMask::all_pass().global_channels();
    if (ct.channels != expected) throw ShapeError("decode: channels must be the full set in canonical order");
    const int bh = ct.data.dim(0), bw = ct.data.dim(1);

    YcbcrPlanes planes;
    Eigen::ArrayXXd* plane_ptr[kComponents] = {&planes.y, &planes.cb, &planes.cr};
    for (int k = 0; k < kComponents; ++k) {
        Tensor comp({bh, bw, kChannelsPerComponent});
        for (int c = 0; c < kChannelsPerComponent; ++c)
            for (int by = 0; by < bh; ++by)
                for (int bx = 0; bx < bw; ++bx)
                    comp(by, bx, c) = ct.data(by, bx, kChannelsPerComponent * k + c);
        *plane_ptr[k] = idct_plane(unpack_channels(comp));
    }
    return planes;
}

RgbImage decode_image(const ChannelTensor& ct) { return ycbcr_to_rgb(decode_planes(ct)); }

}  // namespace fdl
