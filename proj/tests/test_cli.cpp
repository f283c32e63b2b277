#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fdl/cli.hpp"
#include "fdl/codec.hpp"
#include "fdl/dataset.hpp"
#include "fdl/heatmap.hpp"
#include "fdl/tensor_io.hpp"

using namespace fdl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("cli: mask subcommand writes named masks") {
    TempDir dir("fdl_cli_mask");
    CHECK(run_cli({"mask", "--name", "DCT-24S", "--out", dir / "m.txt"}) == 0);
    SelectionMask m = SelectionMask::parse(read_file_text(dir / "m.txt"));
    CHECK(m.total() == 24);
    CHECK(m.component(0).size() == 14);

    CHECK(run_cli({"mask", "--square", "4,2,2", "--out", dir / "sq.txt"}) == 0);
    CHECK(SelectionMask::parse(read_file_text(dir / "sq.txt")).total() == 8);
    CHECK(run_cli({"mask", "--triangle", "3,1,1", "--out", dir / "tri.txt"}) == 0);
    CHECK(SelectionMask::parse(read_file_text(dir / "tri.txt")).component(0) == std::vector<int>{0, 1, 8});

    // Exactly one mask source; unknown names are config errors (exit 1).
    CHECK(run_cli({"mask", "--out", dir / "x.txt"}) == 1);
    CHECK(run_cli({"mask", "--name", "DCT-24S", "--square", "1,1,1", "--out", dir / "x.txt"}) == 1);
    CHECK(run_cli({"mask", "--name", "DCT-99Q", "--out", dir / "x.txt"}) == 1);
}

TEST_CASE("cli: encode produces the contracted tensor shape") {
    TempDir dir("fdl_cli_encode");
    Rng rng(1);
    RgbImage img(64, 64);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    ppm_write_file(dir / "img.ppm", img);

    CHECK(run_cli({"mask", "--name", "DCT-24S", "--out", dir / "m.txt"}) == 0);
    CHECK(run_cli({"encode", "--in", dir / "img.ppm", "--mask", dir / "m.txt", "--out", dir / "t.fdt"}) == 0);
    Tensor t = tensor_read_file(dir / "t.fdt");
    CHECK(t.dims() == std::vector<int>{8, 8, 24});

    // Named masks work directly, and encodes are byte-idempotent.
    CHECK(run_cli({"encode", "--in", dir / "img.ppm", "--mask", "DCT-24S", "--out", dir / "t2.fdt"}) == 0);
    CHECK(read_file_bytes(dir / "t.fdt") == read_file_bytes(dir / "t2.fdt"));

    CHECK(run_cli({"encode", "--in", dir / "missing.ppm", "--mask", "all", "--out", dir / "x.fdt"}) == 2);
    CHECK(run_cli({"encode", "--in", dir / "img.ppm", "--bogus-flag", "--out", dir / "x.fdt"}) == 1);
}

TEST_CASE("cli: gen-data + stats + train + heatmap workflow") {
    TempDir dir("fdl_cli_flow");
    CHECK(run_cli({"gen-data", "--k", "2", "--m", "2", "--n", "12", "--test-n", "6", "--size", "32",
                   "--seed", "3", "--out-dir", dir / "data"}) == 0);
    CHECK(fs::exists(dir.path / "data" / "train_manifest.txt"));
    CHECK(fs::exists(dir.path / "data" / "test_manifest.txt"));
    DatasetManifest m = manifest_read_file(dir / "data/train_manifest.txt");
    CHECK(m.samples.size() == 24);

    CHECK(run_cli({"stats", "--data", dir / "data/train_manifest.txt", "--out", dir / "stats.txt"}) == 0);
    ChannelStats st = ChannelStats::parse(read_file_text(dir / "stats.txt"));
    CHECK(st.channels() == 192);

    CHECK(run_cli({"train", "--model", "freq", "--data", dir / "data/train_manifest.txt", "--val",
                   dir / "data/test_manifest.txt", "--gate", "on", "--lambda", "0.05", "--epochs", "3",
                   "--batch", "8", "--lr", "0.02", "--seed", "5", "--out", dir / "ckpt"}) == 0);
    CHECK(fs::exists(dir.path / "ckpt" / "manifest.txt"));
    CHECK(fs::exists(dir.path / "ckpt" / "metrics.csv"));
    const std::string csv = read_file_text(dir / "ckpt/metrics.csv");
    CHECK(csv.rfind("epoch,split,loss,accuracy,mean_channels_on,lr\n", 0) == 0);

    CHECK(run_cli({"heatmap", "--ckpt", dir / "ckpt", "--data", dir / "data/test_manifest.txt",
                   "--out-prefix", dir / "hm", "--seed", "7"}) == 0);
    HeatMap hm = heatmap_parse_csv(read_file_text(dir / "hm.csv"));
    CHECK(fs::exists(dir.path / "hm_y.pgm"));
    CHECK(fs::exists(dir.path / "hm_cb.pgm"));
    CHECK(fs::exists(dir.path / "hm_cr.pgm"));
    double total = 0;
    for (int c = 0; c < 192; ++c) total += hm.at_global(c);
    CHECK(total > 0.0);

    // Heatmap on an ungated checkpoint is a config error.
    CHECK(run_cli({"train", "--model", "freq", "--data", dir / "data/train_manifest.txt", "--mask",
                   "DCT-24S", "--epochs", "1", "--batch", "8", "--out", dir / "ckpt_plain"}) == 0);
    CHECK(run_cli({"heatmap", "--ckpt", dir / "ckpt_plain", "--data", dir / "data/test_manifest.txt",
                   "--out-prefix", dir / "hm2"}) == 1);
}

TEST_CASE("cli: spatial training consumes downsampled images") {
    TempDir dir("fdl_cli_spatial");
    CHECK(run_cli({"gen-data", "--k", "2", "--m", "1", "--n", "8", "--size", "32", "--seed", "11",
                   "--out-dir", dir / "data"}) == 0);
    CHECK(run_cli({"train", "--model", "spatial", "--data", dir / "data/train_manifest.txt",
                   "--downsample", "1", "--epochs", "2", "--batch", "4", "--out", dir / "ckpt"}) == 0);
    const std::string manifest = read_file_text(dir / "ckpt/manifest.txt");
    CHECK(manifest.find("kind spatial") != std::string::npos);
    CHECK(manifest.find("input 16 16 3") != std::string::npos);
}

TEST_CASE("cli: check passes on a healthy build and fails when corrupted") {
    CHECK(run_cli({"check"}) == 0);
    CHECK(run_cli({"check", "--inject-dct-error"}) == 3);
}

TEST_CASE("cli: help exits zero, missing subcommand exits nonzero") {
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"encode", "--help"}) == 0);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
}
