#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdl/image.hpp"
#include "fdl/mask.hpp"
#include "fdl/rng.hpp"

namespace fdl {

// Where class signatures may live. kHighOnly restricts to channels with
// u+v >= 8 within a component, the frequencies destroyed by 2x box
// downsampling. DC channels are never eligible so class identity stays out of
// the block means.
enum class Regime { kAnywhere, kHighOnly };

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct SignatureChannel {
    int component = 0;  // 0..2
    int index = 0;      // 0..63

    int global() const { return kChannelsPerComponent * component + index; }
    bool operator==(const SignatureChannel& o) const = default;
};

// Synthetic band dataset: each class plants +-A coefficients (random sign per
// block) on its signature channels, all channels get N(0, sigma) noise, and
// samples are rendered to real 8-bit RGB images through the inverse pipeline.
struct DatasetManifest {
    int classes = 0;
    int signature_size = 0;
    double amplitude = 0;
    double sigma = 0;
    int height = 0;
    int width = 0;
    std::uint64_t seed = 0;
    Regime regime = Regime::kAnywhere;
    std::vector<std::vector<SignatureChannel>> signatures;  // [class][signature_size]

    struct Sample {
        std::string path;  // relative to the manifest's directory
        int label = 0;
    };
    std::vector<Sample> samples;

    void validate() const;
    std::string serialize() const;
    static DatasetManifest parse(const std::string& text);

    std::vector<int> signature_globals() const;                 // union over classes, sorted
    std::vector<int> signature_globals(int label) const;        // one class, sorted
};

DatasetManifest manifest_read_file(const std::string& path);
void manifest_write_file(const std::string& path, const DatasetManifest& m);

struct BandDatasetConfig {
    int classes = 4;
    int per_class = 100;
    int signature_size = 3;
    double amplitude = 64.0;
    double sigma = 4.0;
    int height = 64;
    int width = 64;
    std::uint64_t seed = 0;
    Regime regime = Regime::kAnywhere;
    std::string split = "train";  // file-name prefix; also keys the sample noise stream
    int threads = 1;
};

// Draws the per-class signature channels for a config. Depends only on
// (seed, classes, signature_size, regime), so train/test splits generated
// from the same seed share signatures.
std::vector<std::vector<SignatureChannel>> draw_signatures(const BandDatasetConfig& cfg);

// Generates images into out_dir and returns the manifest (not yet written).
DatasetManifest gen_band_dataset(const BandDatasetConfig& cfg, const std::string& out_dir);

}  // namespace fdl
