#include "fdl/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "fdl/check.hpp"
#include "fdl/checkpoint.hpp"
#include "fdl/heatmap.hpp"
#include "fdl/pipeline.hpp"
#include "fdl/tensor_io.hpp"

namespace fdl {

namespace {

namespace fs = std::filesystem;

// "all", a named variant (DCT-24S, ...), or a mask file path.
SelectionMask resolve_mask(const std::string& spec) {
    if (spec.empty() || spec == "all") return SelectionMask::all_pass();
    if (spec.rfind("DCT-", 0) == 0 && spec.find('/') == std::string::npos &&
        spec.find('.') == std::string::npos)
        return SelectionMask::named(spec);
    return SelectionMask::parse(read_file_text(spec));
}

std::vector<int> parse_count_triple(const std::string& text) {
    int y = 0, cb = 0, cr = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d%c", &y, &cb, &cr, &extra) != 3)
        throw ConfigError("expected three comma-separated counts, got '" + text + "'");
    return {y, cb, cr};
}

std::string dir_of(const std::string& path) {
    const fs::path p = fs::path(path).parent_path();
    return p.empty() ? std::string(".") : p.string();
}

struct EncodeArgs {
    std::string in, mask = "all", stats, out;
};

int cmd_encode(const EncodeArgs& a) {
    const RgbImage img = ppm_read_file(a.in);
    const SelectionMask mask = resolve_mask(a.mask);
    std::optional<ChannelStats> stats;
    if (!a.stats.empty()) stats = ChannelStats::parse(read_file_text(a.stats));
    const ChannelTensor ct = encode_image(img, mask, stats ? &*stats : nullptr);
    tensor_write_file(a.out, ct.data);
    std::printf("encoded %s -> %s (%d x %d x %d)\n", a.in.c_str(), a.out.c_str(), ct.data.dim(0),
                ct.data.dim(1), ct.data.dim(2));
    return 0;
}

struct StatsArgs {
    std::string data, mask = "all", out;
};

int cmd_stats(const StatsArgs& a) {
    const DatasetManifest manifest = manifest_read_file(a.data);
    const SelectionMask mask = resolve_mask(a.mask);
    const ChannelStats stats = compute_freq_stats(manifest, dir_of(a.data), mask);
    write_file_text(a.out, stats.serialize());
    std::printf("stats over %zu samples, %d channels -> %s\n", manifest.samples.size(), stats.channels(),
                a.out.c_str());
    return 0;
}

struct MaskArgs {
    std::string name, square, triangle, out;
};

int cmd_mask(const MaskArgs& a) {
    const int given = int(!a.name.empty()) + int(!a.square.empty()) + int(!a.triangle.empty());
    if (given != 1) throw ConfigError("mask: give exactly one of --name, --square, --triangle");
    SelectionMask mask = SelectionMask::all_pass();
    if (!a.name.empty()) {
        mask = SelectionMask::named(a.name);
    } else if (!a.square.empty()) {
        const auto k = parse_count_triple(a.square);
        mask = SelectionMask::square(k[0], k[1], k[2]);
    } else {
        const auto k = parse_count_triple(a.triangle);
        mask = SelectionMask::triangle(k[0], k[1], k[2]);
    }
    write_file_text(a.out, mask.serialize());
    std::printf("mask with %d channels (%zu/%zu/%zu) -> %s\n", mask.total(), mask.component(0).size(),
                mask.component(1).size(), mask.component(2).size(), a.out.c_str());
    return 0;
}

struct GenDataArgs {
    int k = 4, m = 3;
    double a = 64.0, sigma = 4.0;
    int size = 64;
    std::uint64_t seed = 0;
    std::string regime = "anywhere";
    std::string out_dir;
    int n = 100, test_n = 0;
    int threads = 1;
};

int cmd_gen_data(const GenDataArgs& a) {
    BandDatasetConfig cfg;
    cfg.classes = a.k;
    cfg.signature_size = a.m;
    cfg.amplitude = a.a;
    cfg.sigma = a.sigma;
    cfg.height = cfg.width = a.size;
    cfg.seed = a.seed;
    cfg.regime = regime_from_name(a.regime);
    cfg.threads = a.threads;

    cfg.split = "train";
    cfg.per_class = a.n;
    const DatasetManifest train = gen_band_dataset(cfg, a.out_dir);
    manifest_write_file((fs::path(a.out_dir) / "train_manifest.txt").string(), train);
    std::printf("wrote %zu train samples (%d classes) to %s\n", train.samples.size(), a.k, a.out_dir.c_str());

    if (a.test_n > 0) {
        cfg.split = "test";
        cfg.per_class = a.test_n;
        const DatasetManifest test = gen_band_dataset(cfg, a.out_dir);
        manifest_write_file((fs::path(a.out_dir) / "test_manifest.txt").string(), test);
        std::printf("wrote %zu test samples to %s\n", test.samples.size(), a.out_dir.c_str());
    }
    return 0;
}

struct TrainArgs {
    std::string model = "freq";
    std::string data, val;
    std::string mask = "all";
    std::string stats;
    std::string gate = "off";
    double lambda = 0.1;
    double tau = 1.0;
    bool anneal_tau = false;
    int epochs = 40;
    int batch = 32;
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 4e-5;
    double lr_decay = 0.1;
    int lr_interval = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::string metrics;
    int downsample = 0;
    bool scatter = false;
    int reduction = 16;
    int threads = 1;
};

int cmd_train(const TrainArgs& a) {
    if (a.gate != "on" && a.gate != "off") throw ConfigError("train: --gate must be on or off");
    const bool gated = a.gate == "on";
    const DatasetManifest manifest = manifest_read_file(a.data);
    const std::string base = dir_of(a.data);

    ModelSpec spec;
    spec.classes = manifest.classes;
    spec.seed = a.seed;
    spec.gate = gated;
    spec.gate_reduction = a.reduction;
    spec.tau = a.tau;
    spec.lambda = a.lambda;

    LabeledData train_data, val_data;
    std::optional<DatasetManifest> val_manifest;
    if (!a.val.empty()) val_manifest = manifest_read_file(a.val);

    std::optional<SelectionMask> mask;
    std::optional<ChannelStats> stats;
    Model model;

    if (a.model == "freq") {
        spec.kind = ModelSpec::Kind::kFreq;
        mask = resolve_mask(a.mask);
        if (!a.stats.empty())
            stats = ChannelStats::parse(read_file_text(a.stats));
        else
            stats = compute_freq_stats(manifest, base, *mask);
        train_data = load_freq_dataset(manifest, base, *mask, &*stats, a.scatter, a.threads);
        if (val_manifest)
            val_data = load_freq_dataset(*val_manifest, dir_of(a.val), *mask, &*stats, a.scatter, a.threads);
        spec.input_c = a.scatter ? kFullChannels : mask->total();
        spec.input_h = train_data.inputs.at(0).dim(0);
        spec.input_w = train_data.inputs.at(0).dim(1);
        if (gated && spec.input_c < spec.gate_reduction)
            throw ConfigError("train: gate reduction exceeds the channel count");
        model = build_freqnet(spec);
    } else if (a.model == "spatial") {
        if (gated) throw ConfigError("train: the gate applies to the freq model only");
        spec.kind = ModelSpec::Kind::kSpatial;
        spec.input_c = 3;
        if (!a.stats.empty())
            stats = ChannelStats::parse(read_file_text(a.stats));
        else
            stats = compute_rgb_stats(manifest, base, a.downsample);
        train_data = load_spatial_dataset(manifest, base, a.downsample, &*stats, a.threads);
        if (val_manifest)
            val_data = load_spatial_dataset(*val_manifest, dir_of(a.val), a.downsample, &*stats, a.threads);
        spec.input_h = train_data.inputs.at(0).dim(0);
        spec.input_w = train_data.inputs.at(0).dim(1);
        model = build_spatialnet(spec);
    } else {
        throw ConfigError("train: --model must be freq or spatial");
    }

    TrainConfig cfg;
    cfg.lr = a.lr;
    cfg.momentum = a.momentum;
    cfg.weight_decay = a.weight_decay;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.lr_decay = a.lr_decay;
    cfg.lr_decay_interval = a.lr_interval;
    cfg.anneal_tau = a.anneal_tau;
    cfg.seed = a.seed;

    const TrainResult result = train(model, train_data, val_manifest ? &val_data : nullptr, cfg);

    save_checkpoint(a.out, model, mask ? &*mask : nullptr, stats ? &*stats : nullptr, a.scatter);
    const std::string metrics_path =
        a.metrics.empty() ? (fs::path(a.out) / "metrics.csv").string() : a.metrics;
    write_file_text(metrics_path, metrics_to_csv(result.metrics));

    if (!result.metrics.empty()) {
        const EpochMetrics& last = result.metrics.back();
        std::printf("final %s: loss %.6f accuracy %.4f channels-on %.2f\n", last.split.c_str(), last.loss,
                    last.accuracy, last.mean_channels_on);
    }
    std::printf("checkpoint -> %s, metrics -> %s\n", a.out.c_str(), metrics_path.c_str());
    return 0;
}

struct HeatmapArgs {
    std::string ckpt, data, out_prefix;
    std::string mode = "sample";
    std::uint64_t seed = 0;
    int threads = 1;
};

int cmd_heatmap(const HeatmapArgs& a) {
    Checkpoint ck = load_checkpoint(a.ckpt);
    if (!ck.model.spec.gate) throw ConfigError("heatmap: checkpoint has no gate module");
    const DatasetManifest manifest = manifest_read_file(a.data);
    const SelectionMask mask = ck.mask ? *ck.mask : SelectionMask::all_pass();
    LabeledData data = load_freq_dataset(manifest, dir_of(a.data), mask, ck.stats ? &*ck.stats : nullptr,
                                         ck.scatter_to_full, a.threads);
    const EvalResult ev = evaluate(ck.model, data, gate_inference_from_name(a.mode), a.seed);
    if (ev.decisions.empty()) throw ConfigError("heatmap: model produced no gate decisions");
    const HeatMap hm = heatmap_aggregate(ev.decisions);
    heatmap_emit(hm, a.out_prefix);
    std::printf("heatmap over %lld samples (%s mode): accuracy %.4f, mean channels-on %.2f -> %s.csv\n",
                hm.samples, a.mode.c_str(), ev.accuracy, ev.mean_channels_on, a.out_prefix.c_str());
    return 0;
}

int cmd_check(bool inject_dct_error) {
    const std::vector<CheckRow> rows = run_self_checks(inject_dct_error);
    std::fputs(format_check_table(rows).c_str(), stdout);
    for (const CheckRow& r : rows)
        if (!r.pass) return 3;
    std::printf("all %zu checks passed\n", rows.size());
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"frequency-domain input codec and channel-selection toolkit"};
    app.require_subcommand(1);

    EncodeArgs encode_args;
    auto* encode = app.add_subcommand("encode", "encode a PPM image into a DCT channel tensor");
    encode->add_option("--in", encode_args.in, "input PPM (P6) image")->required();
    encode->add_option("--mask", encode_args.mask, "selection mask: 'all', DCT-24S/..., or a mask file");
    encode->add_option("--stats", encode_args.stats, "per-channel stats file for normalization");
    encode->add_option("--out", encode_args.out, "output tensor file (FDT1)")->required();

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "compute per-channel mean/variance over a dataset");
    stats->add_option("--data", stats_args.data, "dataset manifest")->required();
    stats->add_option("--mask", stats_args.mask, "selection mask applied before the stats");
    stats->add_option("--out", stats_args.out, "output stats file")->required();

    MaskArgs mask_args;
    auto* mask = app.add_subcommand("mask", "emit a static channel-selection mask file");
    mask->add_option("--name", mask_args.name, "named variant: DCT-24S/24T/48S/48T/64S/64T");
    mask->add_option("--square", mask_args.square, "square counts kY,kCb,kCr");
    mask->add_option("--triangle", mask_args.triangle, "triangle (zigzag) counts kY,kCb,kCr");
    mask->add_option("--out", mask_args.out, "output mask file")->required();

    GenDataArgs gen_args;
    auto* gen = app.add_subcommand("gen-data", "generate the synthetic band-signature dataset");
    gen->add_option("--k", gen_args.k, "number of classes");
    gen->add_option("--m", gen_args.m, "signature channels per class");
    gen->add_option("--a", gen_args.a, "signature amplitude");
    gen->add_option("--sigma", gen_args.sigma, "coefficient noise sigma");
    gen->add_option("--size", gen_args.size, "square image extent (multiple of 8)");
    gen->add_option("--seed", gen_args.seed, "generator seed");
    gen->add_option("--regime", gen_args.regime, "signature regime: anywhere | high_only");
    gen->add_option("--out-dir", gen_args.out_dir, "output directory")->required();
    gen->add_option("--n", gen_args.n, "train samples per class");
    gen->add_option("--test-n", gen_args.test_n, "test samples per class (0 = no test split)");
    gen->add_option("--threads", gen_args.threads, "worker threads");

    TrainArgs train_args;
    auto* tr = app.add_subcommand("train", "train a frequency or spatial model");
    tr->add_option("--model", train_args.model, "freq | spatial");
    tr->add_option("--data", train_args.data, "training manifest")->required();
    tr->add_option("--val", train_args.val, "validation manifest");
    tr->add_option("--mask", train_args.mask, "channel mask for the freq pipeline");
    tr->add_option("--stats", train_args.stats, "stats file (computed from training data when omitted)");
    tr->add_option("--gate", train_args.gate, "on | off: attach the learnable channel gate");
    tr->add_option("--lambda", train_args.lambda, "selection regularizer weight");
    tr->add_option("--tau", train_args.tau, "gumbel-softmax temperature");
    tr->add_flag("--anneal-tau", train_args.anneal_tau, "anneal tau exponentially to 0.5");
    tr->add_option("--epochs", train_args.epochs, "training epochs");
    tr->add_option("--batch", train_args.batch, "minibatch size");
    tr->add_option("--lr", train_args.lr, "initial learning rate");
    tr->add_option("--momentum", train_args.momentum, "SGD momentum");
    tr->add_option("--weight-decay", train_args.weight_decay, "weight decay");
    tr->add_option("--lr-decay", train_args.lr_decay, "learning-rate decay factor");
    tr->add_option("--lr-interval", train_args.lr_interval, "epochs between decays");
    tr->add_option("--seed", train_args.seed, "seed for init/shuffle/gumbel streams");
    tr->add_option("--out", train_args.out, "checkpoint directory")->required();
    tr->add_option("--metrics", train_args.metrics, "metrics CSV path (default <out>/metrics.csv)");
    tr->add_option("--downsample", train_args.downsample, "2x box-downsample steps (spatial model)");
    tr->add_flag("--scatter", train_args.scatter, "feed masked channels into a full 192-wide model");
    tr->add_option("--reduction", train_args.reduction, "gate SE reduction ratio");
    tr->add_option("--threads", train_args.threads, "worker threads for encoding");

    HeatmapArgs hm_args;
    auto* hm = app.add_subcommand("heatmap", "aggregate gate decisions over a dataset");
    hm->add_option("--ckpt", hm_args.ckpt, "gated checkpoint directory")->required();
    hm->add_option("--data", hm_args.data, "dataset manifest")->required();
    hm->add_option("--out-prefix", hm_args.out_prefix, "output prefix for .csv and .pgm files")->required();
    hm->add_option("--mode", hm_args.mode, "sample | threshold");
    hm->add_option("--seed", hm_args.seed, "seed for sample mode");
    hm->add_option("--threads", hm_args.threads, "worker threads for encoding");

    bool inject_dct_error = false;
    auto* check = app.add_subcommand("check", "run the built-in oracle/invariant suite");
    check->add_flag("--inject-dct-error", inject_dct_error,
                    "perturb one DCT coefficient to exercise the failure path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (encode->parsed()) return cmd_encode(encode_args);
        if (stats->parsed()) return cmd_stats(stats_args);
        if (mask->parsed()) return cmd_mask(mask_args);
        if (gen->parsed()) return cmd_gen_data(gen_args);
        if (tr->parsed()) return cmd_train(train_args);
        if (hm->parsed()) return cmd_heatmap(hm_args);
        if (check->parsed()) return cmd_check(inject_dct_error);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const CheckError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}

}  // namespace fdl
