#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fdl/checkpoint.hpp"
#include "fdl/model.hpp"

using namespace fdl;
namespace fs = std::filesystem;

namespace {

Tensor random_input(std::vector<int> dims, Rng& rng, double lo = -1, double hi = 1) {
    Tensor t(std::move(dims));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

ModelSpec freq_spec(int c, int classes, bool gate = false) {
    ModelSpec s;
    s.kind = ModelSpec::Kind::kFreq;
    s.input_h = 8;
    s.input_w = 8;
    s.input_c = c;
    s.classes = classes;
    s.gate = gate;
    s.gate_reduction = 4;
    return s;
}

LabeledData make_dataset(const ModelSpec& spec, int n, Rng& rng) {
    LabeledData d;
    for (int i = 0; i < n; ++i) {
        d.inputs.push_back(random_input({spec.input_h, spec.input_w, spec.input_c}, rng));
        d.labels.push_back(i % spec.classes);
    }
    return d;
}

// Copies the shared backbone weights from `src` into `dst` by role name.
void copy_roles(const Model& src, Model& dst) {
    for (size_t i = 0; i < dst.roles.size(); ++i) {
        for (size_t j = 0; j < src.roles.size(); ++j)
            if (src.roles[j] == dst.roles[i])
                dst.graph.set_value(dst.params[i], src.graph.value(src.params[j]));
    }
}

Tensor forward_logits(Model& m, const Tensor& input, double noise_off_level = 0,
                      double noise_on_level = 0) {
    m.graph.set_value(m.input, input);
    if (m.has_gate) {
        const int c = m.spec.input_c;
        set_gate_noise(m.graph, m.gate, Eigen::ArrayXd::Constant(c, noise_off_level),
                       Eigen::ArrayXd::Constant(c, noise_on_level));
    }
    m.graph.forward();
    return m.graph.value(m.logits);
}

}  // namespace

TEST_CASE("build_freqnet: shapes and parameter count from the architecture") {
    ModelSpec spec = freq_spec(24, 4);
    Model m = build_freqnet(spec);
    Rng rng(1);
    Tensor logits = forward_logits(m, random_input({8, 8, 24}, rng));
    CHECK(logits.dims() == std::vector<int>{4});

    // Count derived from the stated layer formula:
    // conv1 24*9*32+32, conv2 32*9*32+32, fc 32*4+4.
    const long long expect = 24 * 9 * 32 + 32 + 32 * 9 * 32 + 32 + 32 * 4 + 4;
    CHECK(expect == 16324);
    CHECK(parameter_count(m) == expect);
}

TEST_CASE("build_spatialnet: stem halves the extent twice, capacity near freqnet") {
    ModelSpec spec;
    spec.kind = ModelSpec::Kind::kSpatial;
    spec.input_h = 32;
    spec.input_w = 32;
    spec.input_c = 3;
    spec.classes = 4;
    Model m = build_spatialnet(spec);
    Rng rng(2);
    Tensor logits = forward_logits(m, random_input({32, 32, 3}, rng, 0, 255));
    CHECK(logits.dims() == std::vector<int>{4});

    // Stride-2 stem: 32 -> 16 -> 8.
    Graph g;
    NodeId x = g.input({32, 32, 3});
    NodeId k = g.param(Tensor({3, 3, 3, 16}), "k");
    NodeId c1 = g.conv2d(x, k, 2, 1);
    CHECK(g.value(c1).dims() == std::vector<int>{16, 16, 16});
    NodeId k2 = g.param(Tensor({3, 3, 16, 32}), "k2");
    NodeId c2 = g.conv2d(c1, k2, 2, 1);
    CHECK(g.value(c2).dims() == std::vector<int>{8, 8, 32});

    const long long spatial_params = parameter_count(m);
    const long long freq_params = 16324;
    CHECK(spatial_params == 3 * 9 * 16 + 16 + 16 * 9 * 32 + 32 + 32 * 9 * 32 + 32 + 32 * 4 + 4);
    CHECK(std::abs(static_cast<double>(spatial_params - freq_params)) / freq_params < 0.25);
}

TEST_CASE("gated freqnet: all-off equals bias-only forward of zero input") {
    ModelSpec spec = freq_spec(12, 3, true);
    Model gated = build_freqnet(spec);
    ModelSpec plain_spec = freq_spec(12, 3, false);
    Model plain = build_freqnet(plain_spec);
    copy_roles(gated, plain);

    Rng rng(3);
    Tensor input = random_input({8, 8, 12}, rng);
    // Noise +40 on the off branch forces every hard bit to zero.
    Tensor gated_logits = forward_logits(gated, input, 40.0, -40.0);
    CHECK(gated.graph.value(gated.gate.bits).array().maxCoeff() == 0.0);

    Tensor zero_logits = forward_logits(plain, Tensor({8, 8, 12}));
    CHECK((gated_logits.array() - zero_logits.array()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("gated freqnet with all-on decision equals the ungated model") {
    ModelSpec spec = freq_spec(16, 4, true);
    Model gated = build_freqnet(spec);
    ModelSpec plain_spec = freq_spec(16, 4, false);
    Model plain = build_freqnet(plain_spec);
    copy_roles(gated, plain);

    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor input = random_input({8, 8, 16}, rng);
        Tensor a = forward_logits(gated, input, -40.0, 40.0);  // all bits on
        CHECK(gated.graph.value(gated.gate.bits).array().minCoeff() == 1.0);
        Tensor b = forward_logits(plain, input);
        CHECK((a.array() - b.array()).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pruning equivalence: masked input equals zeroed full-channel input") {
    ModelSpec spec = freq_spec(192, 4);
    Model m = build_freqnet(spec);
    Rng rng(5);
    Tensor full = random_input({8, 8, 192}, rng);

    // Zero everything outside a 24-channel mask.
    std::vector<int> keep;
    for (int c = 0; c < 192; c += 8) keep.push_back(c);
    for (int c = 1; c < 192; c += 23) keep.push_back(c);
    Tensor zeroed({8, 8, 192});
    for (int by = 0; by < 8; ++by)
        for (int bx = 0; bx < 8; ++bx)
            for (int c : keep) zeroed(by, bx, c) = full(by, bx, c);

    // The masked evaluation path scatters kept channels into a zero tensor,
    // which is the identical input.
    Tensor a = forward_logits(m, zeroed);
    Tensor scatter({8, 8, 192});
    for (int by = 0; by < 8; ++by)
        for (int bx = 0; bx < 8; ++bx)
            for (int c : keep) scatter(by, bx, c) = full(by, bx, c);
    Tensor b = forward_logits(m, scatter);
    CHECK((a.array() - b.array()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("downsample2x: constants, checkerboard, loop oracle") {
    RgbImage flat(4, 4);
    for (auto& p : flat.pixels) p = 77;
    RgbImage down = downsample2x(flat);
    CHECK(down.height == 2);
    for (auto p : down.pixels) CHECK(p == 77);

    RgbImage checker(2, 2);
    checker.at(0, 0, 0) = 0; checker.at(0, 1, 0) = 255;
    checker.at(1, 0, 0) = 255; checker.at(1, 1, 0) = 0;
    for (int c = 1; c < 3; ++c) {
        checker.at(0, 0, c) = 0; checker.at(0, 1, c) = 255;
        checker.at(1, 0, c) = 255; checker.at(1, 1, c) = 0;
    }
    RgbImage half = downsample2x(checker);
    for (int c = 0; c < 3; ++c) CHECK(half.at(0, 0, c) == 128);  // mean destroys the pattern

    Rng rng(6);
    RgbImage noise(6, 8);
    for (auto& p : noise.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    RgbImage out = downsample2x(noise);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) {
                const int s = noise.at(2 * y, 2 * x, c) + noise.at(2 * y, 2 * x + 1, c) +
                              noise.at(2 * y + 1, 2 * x, c) + noise.at(2 * y + 1, 2 * x + 1, c);
                CHECK(out.at(y, x, c) == (s + 2) / 4);
            }

    RgbImage odd(3, 4);
    CHECK_THROWS_AS(downsample2x(odd), ShapeError);
}

TEST_CASE("train: lr=0 leaves parameters unchanged") {
    ModelSpec spec = freq_spec(6, 3);
    Model m = build_freqnet(spec);
    Rng rng(7);
    LabeledData data = make_dataset(spec, 12, rng);
    std::vector<Eigen::ArrayXd> before;
    for (NodeId p : m.params) before.push_back(m.graph.value(p).array());
    TrainConfig cfg;
    cfg.lr = 0.0;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    train(m, data, nullptr, cfg);
    for (size_t i = 0; i < m.params.size(); ++i)
        CHECK((m.graph.value(m.params[i]).array() == before[i]).all());
}

TEST_CASE("train: single-batch overfit drives the loss under 0.01") {
    ModelSpec spec = freq_spec(8, 4);
    spec.input_h = 4;
    spec.input_w = 4;
    Model m = build_freqnet(spec);
    Rng rng(8);
    LabeledData data = make_dataset(spec, 32, rng);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 500;  // batch == dataset, one step per epoch
    cfg.batch_size = 32;
    cfg.lr_decay_interval = 1000000;
    cfg.weight_decay = 0.0;
    TrainResult r = train(m, data, nullptr, cfg);
    CHECK(r.metrics.back().loss < 0.01);
    EvalResult ev = evaluate(m, data, GateInference::kThreshold);
    CHECK(ev.accuracy == 1.0);
}

TEST_CASE("train: identical seeds give identical metric traces") {
    auto run = [] {
        ModelSpec spec = freq_spec(6, 3, true);
        spec.lambda = 0.05;
        Model m = build_freqnet(spec);
        Rng rng(9);
        LabeledData data = make_dataset(spec, 24, rng);
        LabeledData val = make_dataset(spec, 9, rng);
        TrainConfig cfg;
        cfg.epochs = 3;
        cfg.batch_size = 8;
        cfg.seed = 42;
        return metrics_to_csv(train(m, data, &val, cfg).metrics);
    };
    CHECK(run() == run());
}

TEST_CASE("train: learning-rate decay schedule is visible in the metrics log") {
    ModelSpec spec = freq_spec(6, 3);
    Model m = build_freqnet(spec);
    Rng rng(10);
    LabeledData data = make_dataset(spec, 8, rng);
    TrainConfig cfg;
    cfg.lr = 0.2;
    cfg.epochs = 5;
    cfg.lr_decay = 0.1;
    cfg.lr_decay_interval = 2;
    cfg.batch_size = 8;
    TrainResult r = train(m, data, nullptr, cfg);
    REQUIRE(r.metrics.size() == 5);
    CHECK(r.metrics[0].lr == doctest::Approx(0.2));
    CHECK(r.metrics[1].lr == doctest::Approx(0.2));
    CHECK(r.metrics[2].lr == doctest::Approx(0.02));
    CHECK(r.metrics[3].lr == doctest::Approx(0.02));
    CHECK(r.metrics[4].lr == doctest::Approx(0.002));
    for (int e = 0; e < 5; ++e) CHECK(scheduled_lr(cfg, e) == r.metrics[(size_t)e].lr);
}

TEST_CASE("train: exploding loss aborts with epoch/batch diagnostic") {
    ModelSpec spec = freq_spec(6, 3);
    Model m = build_freqnet(spec);
    Rng rng(11);
    LabeledData data = make_dataset(spec, 8, rng);
    TrainConfig cfg;
    cfg.lr = 1e18;
    cfg.epochs = 4;
    cfg.batch_size = 4;
    CHECK_THROWS_WITH_AS(train(m, data, nullptr, cfg), doctest::Contains("epoch"), DomainError);
}

TEST_CASE("evaluate: random-init model scores at chance on balanced data") {
    ModelSpec spec = freq_spec(8, 4);
    spec.seed = 77;
    Model m = build_freqnet(spec);
    Rng rng(12);
    LabeledData data = make_dataset(spec, 2400, rng);
    EvalResult ev = evaluate(m, data, GateInference::kThreshold);
    CHECK(ev.accuracy > 0.20);
    CHECK(ev.accuracy < 0.30);
}

TEST_CASE("evaluate: decision export matches the sample count") {
    ModelSpec spec = freq_spec(192, 4, true);
    spec.gate_reduction = 16;
    Model m = build_freqnet(spec);
    Rng rng(13);
    LabeledData data = make_dataset(spec, 10, rng);
    data.channels.resize(192);
    for (int c = 0; c < 192; ++c) data.channels[(size_t)c] = c;
    EvalResult ev = evaluate(m, data, GateInference::kSample, 5);
    CHECK(ev.decisions.size() == 10);
    for (const auto& d : ev.decisions) CHECK(d.size() == 192);

    // Same seed, same decisions.
    EvalResult ev2 = evaluate(m, data, GateInference::kSample, 5);
    CHECK(ev.decisions == ev2.decisions);
}

TEST_CASE("checkpoint: save/load round trip preserves parameters at float32") {
    const fs::path dir = fs::temp_directory_path() / "fdl_ckpt_test";
    fs::remove_all(dir);

    ModelSpec spec = freq_spec(24, 4, true);
    spec.lambda = 0.1;
    spec.tau = 0.8;
    Model m = build_freqnet(spec);
    SelectionMask mask = SelectionMask::named("DCT-24S");
    save_checkpoint(dir.string(), m, &mask, nullptr, false);

    Checkpoint ck = load_checkpoint(dir.string());
    CHECK(ck.model.spec.gate);
    CHECK(ck.model.spec.lambda == 0.1);
    CHECK(ck.model.spec.tau == 0.8);
    CHECK(ck.mask.has_value());
    CHECK(*ck.mask == mask);
    CHECK_FALSE(ck.stats.has_value());
    REQUIRE(ck.model.roles == m.roles);
    for (size_t i = 0; i < m.params.size(); ++i) {
        const Tensor& orig = m.graph.value(m.params[i]);
        const Tensor& loaded = ck.model.graph.value(ck.model.params[i]);
        REQUIRE(orig.dims() == loaded.dims());
        for (Eigen::Index j = 0; j < orig.size(); ++j)
            CHECK(loaded[j] == static_cast<double>(static_cast<float>(orig[j])));
    }
    fs::remove_all(dir);
}
