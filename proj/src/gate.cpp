#include "fdl/gate.hpp"

#include <cmath>

namespace fdl {

namespace {

double softplus_pos(double x) {
    double y = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return y > 1e-300 ? y : 1e-300;
}

double sigmoid(double x) { return x > 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

GateParams GateParams::init(int channels, int reduction, double tau, double lambda, Rng& rng) {
    if (channels < 1) throw ConfigError("gate: channel count must be positive");
    if (reduction < 1) throw ConfigError("gate: reduction ratio must be positive");
    if (tau <= 0) throw ConfigError("gate: temperature must be positive");
    if (lambda < 0) throw ConfigError("gate: lambda must be nonnegative");
    GateParams p;
    p.channels = channels;
    p.reduction = reduction;
    p.hidden = std::max(1, channels / reduction);
    p.tau = tau;
    p.lambda = lambda;
    auto glorot = [&rng](std::vector<int> dims, int fan_in, int fan_out) {
        Tensor t(std::move(dims));
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
        return t;
    };
    p.w1 = glorot({channels, p.hidden}, channels, p.hidden);
    p.b1 = Tensor({p.hidden});
    p.w2 = glorot({p.hidden, channels}, p.hidden, channels);
    // Unit excitation bias and unit heads: every channel starts at p = 1/2
    // with an O(1) operand behind the score heads, so the off/on branches
    // receive usable gradients from the first step.
    p.b2 = Tensor::constant({channels}, 1.0);
    p.alpha = Tensor::constant({channels}, 1.0);
    p.beta = Tensor::constant({channels}, 1.0);
    return p;
}

double gumbel_from_uniform(double u) {
    if (u < 1e-20) u = 1e-20;
    if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
    return -std::log(-std::log(u));
}

double gumbel_standard(Rng& rng) { return gumbel_from_uniform(rng.uniform()); }

ScorePairs gate_scores(const Tensor& x, const GateParams& params) {
    if (x.rank() != 3 || x.dim(2) != params.channels)
        throw ShapeError("gate_scores: input channel count does not match gate parameters");
    const int c = params.channels, hidden = params.hidden;
    const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);

    Eigen::VectorXd s = as_matrix(x, hw, c).colwise().sum().transpose() / static_cast<double>(hw);
    Eigen::VectorXd h =
        (as_matrix(params.w1, c, hidden).transpose() * s +
         Eigen::Map<const Eigen::VectorXd>(params.b1.array().data(), hidden))
            .cwiseMax(0.0);
    Eigen::VectorXd e = as_matrix(params.w2, hidden, c).transpose() * h +
                        Eigen::Map<const Eigen::VectorXd>(params.b2.array().data(), c);

    ScorePairs out;
    out.off.resize(c);
    out.on.resize(c);
    for (int i = 0; i < c; ++i) {
        out.off[i] = softplus_pos(params.alpha.array()[i] * e[i]);
        out.on[i] = softplus_pos(params.beta.array()[i] * e[i]);
    }
    return out;
}

GateDecision gate_sample(const ScorePairs& scores, double tau, Rng& rng) {
    if (tau <= 0) throw ConfigError("gate_sample: temperature must be positive");
    const Eigen::Index c = scores.off.size();
    if (scores.on.size() != c) throw ShapeError("gate_sample: score pair lengths differ");
    if ((scores.off <= 0).any() || (scores.on <= 0).any())
        throw DomainError("gate_sample: scores must be strictly positive");

    GateDecision d;
    d.bits.resize(static_cast<size_t>(c));
    d.p_on = scores.on / (scores.off + scores.on);
    d.noise_off.resize(c);
    d.noise_on.resize(c);
    d.soft_on.resize(c);
    for (Eigen::Index i = 0; i < c; ++i) {
        d.noise_off[i] = gumbel_standard(rng);
        d.noise_on[i] = gumbel_standard(rng);
        const double z_off = (std::log(scores.off[i]) + d.noise_off[i]) / tau;
        const double z_on = (std::log(scores.on[i]) + d.noise_on[i]) / tau;
        d.soft_on[i] = sigmoid(z_on - z_off);
        d.bits[static_cast<size_t>(i)] = z_on > z_off ? 1 : 0;
    }
    return d;
}

GateDecision gate_threshold(const ScorePairs& scores) {
    const Eigen::Index c = scores.off.size();
    if (scores.on.size() != c) throw ShapeError("gate_threshold: score pair lengths differ");
    if ((scores.off <= 0).any() || (scores.on <= 0).any())
        throw DomainError("gate_threshold: scores must be strictly positive");
    GateDecision d;
    d.p_on = scores.on / (scores.off + scores.on);
    d.soft_on = d.p_on;
    d.noise_off = Eigen::ArrayXd::Zero(c);
    d.noise_on = Eigen::ArrayXd::Zero(c);
    d.bits.resize(static_cast<size_t>(c));
    for (Eigen::Index i = 0; i < c; ++i) d.bits[static_cast<size_t>(i)] = d.p_on[i] > 0.5 ? 1 : 0;
    return d;
}

Tensor gate_apply(const Tensor& x, const GateDecision& decision) {
    if (x.rank() != 3 || static_cast<size_t>(x.dim(2)) != decision.bits.size())
        throw ShapeError("gate_apply: channel count mismatch");
    Tensor out = x;
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    for (int ch = 0; ch < c; ++ch) {
        if (decision.bits[static_cast<size_t>(ch)]) continue;
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) out(y, xx, ch) = 0.0;
    }
    return out;
}

int GateDecision::on_count() const {
    int n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

double selection_regularizer(const GateDecision& decision, double lambda) {
    if (lambda < 0) throw ConfigError("selection_regularizer: lambda must be nonnegative");
    return lambda * decision.on_count();
}

GateInference gate_inference_from_name(const std::string& name) {
    if (name == "sample") return GateInference::kSample;
    if (name == "threshold") return GateInference::kThreshold;
    throw ConfigError("unknown gate inference mode '" + name + "'");
}

const char* gate_inference_name(GateInference m) {
    return m == GateInference::kSample ? "sample" : "threshold";
}

GateDecision gate_decide(const Tensor& x, const GateParams& params, GateInference mode, Rng& rng) {
    const ScorePairs scores = gate_scores(x, params);
    if (mode == GateInference::kSample) return gate_sample(scores, params.tau, rng);
    return gate_threshold(scores);
}

GateNodes attach_gate(Graph& g, NodeId x, const GateParams& params, bool hard) {
    const Tensor& xv = g.value(x);
    if (xv.rank() != 3 || xv.dim(2) != params.channels)
        throw ShapeError("attach_gate: input channel count does not match gate parameters");
    const int c = params.channels;

    GateNodes n;
    NodeId w1 = g.param(params.w1, "gate.w1");
    NodeId b1 = g.param(params.b1, "gate.b1");
    NodeId w2 = g.param(params.w2, "gate.w2");
    NodeId b2 = g.param(params.b2, "gate.b2");
    NodeId alpha = g.param(params.alpha, "gate.alpha");
    NodeId beta = g.param(params.beta, "gate.beta");
    n.params = {w1, b1, w2, b2, alpha, beta};

    NodeId pooled = g.global_avg_pool(x);
    NodeId excite = g.dense(g.relu(g.dense(pooled, w1, b1)), w2, b2);
    NodeId pi_off = g.softplus(g.mul(excite, alpha));
    NodeId pi_on = g.softplus(g.mul(excite, beta));
    NodeId l_off = g.log(pi_off);
    NodeId l_on = g.log(pi_on);

    n.p_on = g.exp(g.add(l_on, g.scale(g.log(g.add(pi_off, pi_on)), -1.0)));

    n.noise_off = g.input({c}, "gate.noise_off");
    n.noise_on = g.input({c}, "gate.noise_on");
    // t = ((l_on + g_on) - (l_off + g_off)) / tau, soft = sigmoid(t) composed
    // as exp(-softplus(-t)) which is stable in both tails.
    NodeId t = g.scale(g.add(g.add(l_on, n.noise_on), g.scale(g.add(l_off, n.noise_off), -1.0)),
                       1.0 / params.tau);
    n.tau_scale = t;
    n.soft_on = g.exp(g.scale(g.softplus(g.scale(t, -1.0)), -1.0));
    n.bits = g.hard_gate(n.soft_on, hard);
    n.gated = g.mul_channel(x, n.bits);
    n.reg = g.scale(g.sum(n.bits), params.lambda);
    return n;
}

void set_gate_noise(Graph& g, const GateNodes& nodes, const Eigen::ArrayXd& noise_off,
                    const Eigen::ArrayXd& noise_on) {
    g.set_value(nodes.noise_off, Tensor(g.value(nodes.noise_off).dims(), noise_off));
    g.set_value(nodes.noise_on, Tensor(g.value(nodes.noise_on).dims(), noise_on));
}

}  // namespace fdl
