#include "fdl/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <thread>

namespace fdl {

namespace {

std::string resolve(const std::string& base_dir, const std::string& rel) {
    return (std::filesystem::path(base_dir) / rel).string();
}

void for_each_index(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

Tensor spatial_tensor(const RgbImage& img, const ChannelStats* stats) {
    Tensor t({img.height, img.width, 3});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) t(y, x, c) = img.at(y, x, c);
    if (stats) {
        if (stats->channels() != 3) throw ConfigError("spatial stats must have exactly 3 channels");
        for (int c = 0; c < 3; ++c) {
            const double m = stats->mean(c);
            const double s = std::sqrt(stats->variance(c) + kStandardizeEpsilon);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) t(y, x, c) = (t(y, x, c) - m) / s;
        }
    }
    return t;
}

RgbImage load_downsampled(const std::string& path, int steps) {
    RgbImage img = ppm_read_file(path);
    for (int s = 0; s < steps; ++s) img = downsample2x(img);
    return img;
}

}  // namespace

LabeledData load_freq_dataset(const DatasetManifest& manifest, const std::string& base_dir,
                              const SelectionMask& mask, const ChannelStats* stats, bool scatter_to_full,
                              int threads) {
    LabeledData data;
    const int n = static_cast<int>(manifest.samples.size());
    data.inputs.resize(static_cast<size_t>(n));
    data.labels.resize(static_cast<size_t>(n));
    const std::vector<int> globals = mask.global_channels();

    for_each_index(n, threads, [&](int i) {
        const auto& sample = manifest.samples[static_cast<size_t>(i)];
        const RgbImage img = ppm_read_file(resolve(base_dir, sample.path));
        ChannelTensor ct = encode_image(img, mask, stats);
        if (scatter_to_full && ct.channel_count() != kFullChannels) {
            Tensor full({ct.data.dim(0), ct.data.dim(1), kFullChannels});
            for (int pos = 0; pos < ct.channel_count(); ++pos) {
                const int dst = ct.channels[static_cast<size_t>(pos)];
                for (int by = 0; by < ct.data.dim(0); ++by)
                    for (int bx = 0; bx < ct.data.dim(1); ++bx) full(by, bx, dst) = ct.data(by, bx, pos);
            }
            data.inputs[static_cast<size_t>(i)] = std::move(full);
        } else {
            data.inputs[static_cast<size_t>(i)] = std::move(ct.data);
        }
        data.labels[static_cast<size_t>(i)] = sample.label;
    });

    if (scatter_to_full) {
        data.channels.resize(kFullChannels);
        for (int c = 0; c < kFullChannels; ++c) data.channels[static_cast<size_t>(c)] = c;
    } else {
        data.channels = globals;
    }
    return data;
}

LabeledData load_spatial_dataset(const DatasetManifest& manifest, const std::string& base_dir,
                                 int downsample_steps, const ChannelStats* rgb_stats, int threads) {
    LabeledData data;
    const int n = static_cast<int>(manifest.samples.size());
    data.inputs.resize(static_cast<size_t>(n));
    data.labels.resize(static_cast<size_t>(n));
    for_each_index(n, threads, [&](int i) {
        const auto& sample = manifest.samples[static_cast<size_t>(i)];
        const RgbImage img = load_downsampled(resolve(base_dir, sample.path), downsample_steps);
        data.inputs[static_cast<size_t>(i)] = spatial_tensor(img, rgb_stats);
        data.labels[static_cast<size_t>(i)] = sample.label;
    });
    return data;
}

ChannelStats compute_freq_stats(const DatasetManifest& manifest, const std::string& base_dir,
                                const SelectionMask& mask) {
    ChannelStats stats(mask.total());
    for (const auto& sample : manifest.samples) {
        const RgbImage img = ppm_read_file(resolve(base_dir, sample.path));
        stats.update(encode_image(img, mask, nullptr).data);
    }
    stats.finalize();
    return stats;
}

ChannelStats compute_rgb_stats(const DatasetManifest& manifest, const std::string& base_dir,
                               int downsample_steps) {
    ChannelStats stats(3);
    for (const auto& sample : manifest.samples) {
        const RgbImage img = load_downsampled(resolve(base_dir, sample.path), downsample_steps);
        stats.update(spatial_tensor(img, nullptr));
    }
    stats.finalize();
    return stats;
}

Eigen::ArrayXd channel_energy(const DatasetManifest& manifest, const std::string& base_dir) {
    Eigen::ArrayXd energy = Eigen::ArrayXd::Zero(kFullChannels);
    long long positions = 0;
    for (const auto& sample : manifest.samples) {
        const RgbImage img = ppm_read_file(resolve(base_dir, sample.path));
        const ChannelTensor ct = encode_image(img);
        const int bh = ct.data.dim(0), bw = ct.data.dim(1);
        for (int c = 0; c < kFullChannels; ++c)
            for (int by = 0; by < bh; ++by)
                for (int bx = 0; bx < bw; ++bx) energy[c] += ct.data(by, bx, c) * ct.data(by, bx, c);
        positions += static_cast<long long>(bh) * bw;
    }
    if (positions == 0) throw ConfigError("channel_energy: empty dataset");
    return energy / static_cast<double>(positions);
}

}  // namespace fdl
