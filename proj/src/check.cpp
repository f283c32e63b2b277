#include "fdl/check.hpp"

#include <cmath>
#include <cstdio>

#include "fdl/codec.hpp"
#include "fdl/gate.hpp"
#include "fdl/graph.hpp"
#include "fdl/rng.hpp"

namespace fdl {

namespace {

char detail_buf[160];

const char* fmt(const char* format, double a, double b) {
    std::snprintf(detail_buf, sizeof detail_buf, format, a, b);
    return detail_buf;
}

Block8 random_block(Rng& rng) {
    Block8 b;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) b(i, j) = rng.uniform(0, 255);
    return b;
}

Block8 dct_reference(const Block8& x) {
    const double pi = 3.14159265358979323846264338327950288;
    Block8 out;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            const double au = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            const double av = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double acc = 0;
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    acc += (x(i, j) - 128.0) * std::cos((2 * i + 1) * u * pi / 16.0) *
                           std::cos((2 * j + 1) * v * pi / 16.0);
            out(u, v) = au * av * acc;
        }
    return out;
}

CheckRow check_dct_oracle(bool inject_error) {
    Rng rng(1001);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Block8 x = random_block(rng);
        Block8 fast = dct8x8(x);
        if (inject_error && trial == 0) fast(3, 4) += 1e-3;
        worst = std::max(worst, (fast - dct_reference(x)).cwiseAbs().maxCoeff());
    }
    return {"dct-definitional-oracle", worst < 1e-9, fmt("max abs err %.3g (limit %.0e)", worst, 1e-9)};
}

CheckRow check_parseval() {
    Rng rng(1002);
    double worst_energy = 0, worst_round = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Block8 x = random_block(rng);
        const Block8 d = dct8x8(x);
        worst_energy =
            std::max(worst_energy, std::abs((x.array() - 128.0).square().sum() - d.array().square().sum()));
        worst_round = std::max(worst_round, (idct8x8(d) - x).cwiseAbs().maxCoeff());
    }
    const bool pass = worst_energy < 1e-9 && worst_round < 1e-10;
    return {"dct-parseval-inverse", pass, fmt("energy gap %.3g, round trip %.3g", worst_energy, worst_round)};
}

CheckRow check_round_trip() {
    Rng rng(1003);
    int worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        RgbImage img(32, 32);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
        const RgbImage back = decode_image(encode_image(img));
        for (size_t i = 0; i < img.pixels.size(); ++i)
            worst = std::max(worst, std::abs(int(img.pixels[i]) - int(back.pixels[i])));
    }
    return {"codec-round-trip", worst <= 2, fmt("max pixel err %.0f (limit %.0f)", double(worst), 2.0)};
}

CheckRow check_pack_bijection() {
    Rng rng(1004);
    BlockGrid grid(3, 5);
    for (auto& b : grid.blocks) b = random_block(rng);
    const Tensor packed = pack_channels(grid);
    const BlockGrid back = unpack_channels(packed);
    double gap = 0;
    for (size_t i = 0; i < grid.blocks.size(); ++i)
        gap = std::max(gap, (grid.blocks[i] - back.blocks[i]).cwiseAbs().maxCoeff());
    const Tensor repacked = pack_channels(back);
    gap = std::max(gap, (repacked.array() - packed.array()).abs().maxCoeff());
    return {"pack-bijection", gap == 0.0, fmt("max gap %.3g (must be %.0f)", gap, 0.0)};
}

CheckRow check_gradients_net() {
    Rng rng(1005);
    Graph g;
    NodeId x = g.input({4, 4, 3});
    Tensor k({3, 3, 3, 4});
    for (Eigen::Index i = 0; i < k.size(); ++i) k[i] = rng.uniform(-0.6, 0.6);
    Tensor w({4, 3}), b({3});
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(-0.6, 0.6);
    NodeId conv = g.relu(g.conv2d(x, g.param(k, "k"), 1, 1));
    NodeId loss = g.softmax_xent(g.dense(g.global_avg_pool(conv), g.param(w, "w"), g.param(b, "b")), 1);
    Tensor input({4, 4, 3});
    for (Eigen::Index i = 0; i < input.size(); ++i) input[i] = rng.uniform(-1, 1);
    g.set_value(x, input);
    const GradCheckReport rep = grad_check(g, loss);
    return {"gradient-check-net", rep.max_rel_err < 1e-5, fmt("max rel err %.3g (limit %.0e)", rep.max_rel_err, 1e-5)};
}

CheckRow check_gradients_gate() {
    Rng rng(1006);
    const int c = 8;
    GateParams p = GateParams::init(c, 4, 0.9, 0.1, rng);
    for (Eigen::Index i = 0; i < p.b2.size(); ++i) p.b2[i] = rng.uniform(-0.5, 0.5);
    Graph g;
    NodeId x = g.input({3, 3, c});
    GateNodes nodes = attach_gate(g, x, p, /*hard=*/false);
    NodeId loss = g.add(nodes.reg, g.scale(g.sum(g.mul(nodes.gated, nodes.gated)), 0.5));
    Tensor input({3, 3, c});
    for (Eigen::Index i = 0; i < input.size(); ++i) input[i] = rng.uniform(-1.5, 1.5);
    g.set_value(x, input);
    Eigen::ArrayXd off(c), on(c);
    for (int i = 0; i < c; ++i) {
        off[i] = gumbel_standard(rng);
        on[i] = gumbel_standard(rng);
    }
    set_gate_noise(g, nodes, off, on);
    const GradCheckReport rep = grad_check(g, loss);
    return {"gradient-check-gate", rep.max_rel_err < 1e-5, fmt("max rel err %.3g (limit %.0e)", rep.max_rel_err, 1e-5)};
}

CheckRow check_gumbel_frequency() {
    ScorePairs s{Eigen::ArrayXd::Constant(1, 7.5), Eigen::ArrayXd::Constant(1, 2.5)};
    Rng rng(1007);
    long long off = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) off += gate_sample(s, 1.0, rng).bits[0] == 0;
    const double rate = static_cast<double>(off) / n;
    return {"gumbel-frequency", std::abs(rate - 0.75) <= 0.01, fmt("off-rate %.4f (want 0.75 +- %.2f)", rate, 0.01)};
}

}  // namespace

std::vector<CheckRow> run_self_checks(bool inject_dct_error) {
    return {
        check_dct_oracle(inject_dct_error),
        check_parseval(),
        check_round_trip(),
        check_pack_bijection(),
        check_gradients_net(),
        check_gradients_gate(),
        check_gumbel_frequency(),
    };
}

std::string format_check_table(const std::vector<CheckRow>& rows) {
    std::string out = "check                     result  detail\n";
    for (const CheckRow& r : rows) {
        char line[240];
        std::snprintf(line, sizeof line, "%-25s %-7s %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                      r.detail.c_str());
        out += line;
    }
    return out;
}

}  // namespace fdl
