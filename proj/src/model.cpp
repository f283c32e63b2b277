#include "fdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fdl/mask.hpp"

namespace fdl {

const char* model_kind_name(ModelSpec::Kind k) {
    return k == ModelSpec::Kind::kFreq ? "freq" : "spatial";
}

ModelSpec::Kind model_kind_from_name(const std::string& name) {
    if (name == "freq") return ModelSpec::Kind::kFreq;
    if (name == "spatial") return ModelSpec::Kind::kSpatial;
    throw ConfigError("unknown model kind '" + name + "'");
}

namespace {

Tensor glorot(std::vector<int> dims, int fan_in, int fan_out, Rng& rng) {
    Tensor t(std::move(dims));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

struct ConvBlock {
    NodeId out;
};

// conv3x3 + bias + relu; registers parameters under `name`.
NodeId conv_block(Model& m, NodeId x, int cin, int cout, int stride, const std::string& name, Rng& rng) {
    NodeId w = m.graph.param(glorot({3, 3, cin, cout}, 9 * cin, 9 * cout, rng), name + ".weight");
    NodeId b = m.graph.param(Tensor({cout}), name + ".bias");
    m.params.push_back(w);
    m.roles.push_back(name + ".weight");
    m.params.push_back(b);
    m.roles.push_back(name + ".bias");
    return m.graph.relu(m.graph.add_channel(m.graph.conv2d(x, w, stride, 1), b));
}

NodeId head(Model& m, NodeId x, int width, int classes, Rng& rng) {
    NodeId pooled = m.graph.global_avg_pool(x);
    NodeId w = m.graph.param(glorot({width, classes}, width, classes, rng), "fc.weight");
    NodeId b = m.graph.param(Tensor({classes}), "fc.bias");
    m.params.push_back(w);
    m.roles.push_back("fc.weight");
    m.params.push_back(b);
    m.roles.push_back("fc.bias");
    return m.graph.dense(pooled, w, b);
}

void check_spec(const ModelSpec& spec) {
    if (spec.input_h < 1 || spec.input_w < 1 || spec.input_c < 1)
        throw ConfigError("model: input extents must be positive");
    if (spec.classes < 2) throw ConfigError("model: need at least two classes");
    if (spec.tau <= 0) throw ConfigError("model: tau must be positive");
    if (spec.lambda < 0) throw ConfigError("model: lambda must be nonnegative");
}

}  // namespace

Model build_freqnet(const ModelSpec& spec) {
    check_spec(spec);
    if (spec.kind != ModelSpec::Kind::kFreq) throw ConfigError("build_freqnet: spec kind must be freq");
    Model m;
    m.spec = spec;
    Rng rng = Rng(spec.seed).stream(Rng::kInit);

    m.input = m.graph.input({spec.input_h, spec.input_w, spec.input_c}, "input");
    NodeId x = m.input;
    if (spec.gate) {
        GateParams gp = GateParams::init(spec.input_c, spec.gate_reduction, spec.tau, spec.lambda, rng);
        m.gate = attach_gate(m.graph, x, gp, /*hard=*/true);
        m.has_gate = true;
        static const char* kGateRoles[] = {"gate.w1", "gate.b1", "gate.w2", "gate.b2", "gate.alpha",
                                           "gate.beta"};
        for (size_t i = 0; i < m.gate.params.size(); ++i) {
            m.params.push_back(m.gate.params[i]);
            m.roles.push_back(kGateRoles[i]);
        }
        x = m.gate.gated;
    }
    x = conv_block(m, x, spec.input_c, 32, 1, "conv1", rng);
    x = conv_block(m, x, 32, 32, 1, "conv2", rng);
    m.logits = head(m, x, 32, spec.classes, rng);
    m.xent = m.graph.softmax_xent(m.logits, 0);
    m.loss = spec.gate ? m.graph.add(m.xent, m.gate.reg) : m.xent;
    return m;
}

Model build_spatialnet(const ModelSpec& spec) {
    check_spec(spec);
    if (spec.kind != ModelSpec::Kind::kSpatial) throw ConfigError("build_spatialnet: spec kind must be spatial");
    if (spec.gate) throw ConfigError("build_spatialnet: the gate applies to frequency inputs only");
    if (spec.input_c != 3) throw ConfigError("build_spatialnet: spatial input must have 3 channels");
    Model m;
    m.spec = spec;
    Rng rng = Rng(spec.seed).stream(Rng::kInit);

    m.input = m.graph.input({spec.input_h, spec.input_w, spec.input_c}, "input");
    NodeId x = conv_block(m, m.input, 3, 16, 2, "conv1", rng);
    x = conv_block(m, x, 16, 32, 2, "conv2", rng);
    x = conv_block(m, x, 32, 32, 1, "conv3", rng);
    m.logits = head(m, x, 32, spec.classes, rng);
    m.xent = m.graph.softmax_xent(m.logits, 0);
    m.loss = m.xent;
    return m;
}

long long parameter_count(const Model& m) {
    long long n = 0;
    for (NodeId p : m.params) n += m.graph.value(p).size();
    return n;
}

double scheduled_lr(const TrainConfig& cfg, int epoch) {
    return cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_interval);
}

std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics) {
    std::string out = "epoch,split,loss,accuracy,mean_channels_on,lr\n";
    char buf[192];
    for (const EpochMetrics& m : metrics) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g\n", m.epoch, m.split.c_str(), m.loss,
                      m.accuracy, m.mean_channels_on, m.lr);
        out += buf;
    }
    return out;
}

namespace {

void check_data(const Model& model, const LabeledData& data, const char* what) {
    if (data.inputs.empty()) throw ConfigError(std::string(what) + ": dataset is empty");
    if (data.inputs.size() != data.labels.size())
        throw ConfigError(std::string(what) + ": inputs/labels count mismatch");
    const auto& dims = model.graph.value(model.input).dims();
    for (const Tensor& t : data.inputs)
        if (t.dims() != dims) throw ShapeError(std::string(what) + ": sample shape does not match model input");
    for (int label : data.labels)
        if (label < 0 || label >= model.spec.classes)
            throw ConfigError(std::string(what) + ": label out of range");
}

int argmax_class(const Tensor& logits) {
    int best = 0;
    for (int i = 1; i < logits.dim(0); ++i)
        if (logits(i) > logits(best)) best = i;
    return best;
}

struct ForwardStats {
    double loss_sum = 0;
    long long correct = 0;
    double bits_sum = 0;
    long long count = 0;
};

}  // namespace

TrainResult train(Model& model, const LabeledData& train_data, const LabeledData* val_data,
                  const TrainConfig& cfg) {
    check_data(model, train_data, "train");
    if (val_data) check_data(model, *val_data, "val");
    if (cfg.epochs < 0 || cfg.batch_size < 1) throw ConfigError("train: bad epochs/batch size");

    Graph& g = model.graph;
    const int n = static_cast<int>(train_data.size());
    const int channels = model.graph.value(model.input).dim(2);
    Rng base(cfg.seed);

    std::vector<Tensor> values(model.params.size());
    std::vector<Tensor> grads(model.params.size());
    std::vector<Tensor> velocity;

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    TrainResult result;
    std::uint64_t gumbel_step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = scheduled_lr(cfg, epoch);
        if (model.has_gate && cfg.anneal_tau && cfg.epochs > 1) {
            const double t0 = model.spec.tau;
            const double tau = t0 * std::pow(0.5 / t0, static_cast<double>(epoch) / (cfg.epochs - 1));
            g.set_factor(model.gate.tau_scale, 1.0 / tau);
        }

        Rng shuffle_rng = base.stream(Rng::kData, static_cast<std::uint64_t>(epoch));
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(shuffle_rng.below(static_cast<std::uint64_t>(i) + 1))]);

        ForwardStats stats;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int batch = std::min(cfg.batch_size, n - start);
            g.zero_grad();
            for (int b = 0; b < batch; ++b) {
                const int idx = order[static_cast<size_t>(start + b)];
                g.set_value(model.input, train_data.inputs[static_cast<size_t>(idx)]);
                g.set_label(model.xent, train_data.labels[static_cast<size_t>(idx)]);
                if (model.has_gate) {
                    Rng noise = base.stream(Rng::kGumbel, gumbel_step++);
                    Eigen::ArrayXd off(channels), on(channels);
                    for (int c = 0; c < channels; ++c) {
                        off[c] = gumbel_from_uniform(noise.uniform());
                        on[c] = gumbel_from_uniform(noise.uniform());
                    }
                    set_gate_noise(g, model.gate, off, on);
                }
                try {
                    g.forward();
                } catch (const DomainError& e) {
                    throw DomainError("train: non-finite forward at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(start / cfg.batch_size) + ": " + e.what());
                }
                g.backward(model.loss);
                const double loss = g.value(model.loss).scalar_value();
                if (!std::isfinite(loss))
                    throw DomainError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(start / cfg.batch_size));
                stats.loss_sum += loss;
                stats.correct +=
                    argmax_class(g.value(model.logits)) == train_data.labels[static_cast<size_t>(idx)];
                stats.bits_sum +=
                    model.has_gate ? g.value(model.gate.bits).array().sum() : static_cast<double>(channels);
                ++stats.count;
            }
            for (size_t p = 0; p < model.params.size(); ++p) {
                values[p] = g.value(model.params[p]);
                grads[p] = g.grad(model.params[p]);
                grads[p].array() /= static_cast<double>(batch);
            }
            sgd_step(values, grads, velocity, lr, cfg.momentum, cfg.weight_decay);
            for (size_t p = 0; p < model.params.size(); ++p) g.set_value(model.params[p], values[p]);
        }

        EpochMetrics tm;
        tm.epoch = epoch;
        tm.split = "train";
        tm.loss = stats.loss_sum / static_cast<double>(stats.count);
        tm.accuracy = static_cast<double>(stats.correct) / static_cast<double>(stats.count);
        tm.mean_channels_on = stats.bits_sum / static_cast<double>(stats.count);
        tm.lr = lr;
        result.metrics.push_back(tm);

        if (val_data) {
            EvalResult ev = evaluate(model, *val_data, GateInference::kThreshold);
            EpochMetrics vm;
            vm.epoch = epoch;
            vm.split = "val";
            vm.loss = ev.mean_loss;
            vm.accuracy = ev.accuracy;
            vm.mean_channels_on = ev.mean_channels_on;
            vm.lr = lr;
            result.metrics.push_back(vm);
        }
    }
    return result;
}

EvalResult evaluate(Model& model, const LabeledData& data, GateInference mode, std::uint64_t seed) {
    check_data(model, data, "evaluate");
    Graph& g = model.graph;
    const int channels = model.graph.value(model.input).dim(2);
    Rng base(seed);

    EvalResult out;
    double loss_sum = 0, bits_sum = 0;
    long long correct = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        g.set_value(model.input, data.inputs[i]);
        g.set_label(model.xent, data.labels[i]);
        if (model.has_gate) {
            Eigen::ArrayXd off = Eigen::ArrayXd::Zero(channels), on = Eigen::ArrayXd::Zero(channels);
            if (mode == GateInference::kSample) {
                Rng noise = base.stream(Rng::kGumbelEval, static_cast<std::uint64_t>(i));
                for (int c = 0; c < channels; ++c) {
                    off[c] = gumbel_from_uniform(noise.uniform());
                    on[c] = gumbel_from_uniform(noise.uniform());
                }
            }
            set_gate_noise(g, model.gate, off, on);
        }
        g.forward();
        loss_sum += g.value(model.loss).scalar_value();
        correct += argmax_class(g.value(model.logits)) == data.labels[i];
        if (model.has_gate) {
            const Tensor& bits = g.value(model.gate.bits);
            bits_sum += bits.array().sum();
            std::vector<std::uint8_t> decision(kFullChannels, 0);
            if (!data.channels.empty()) {
                if (data.channels.size() != static_cast<size_t>(channels))
                    throw ShapeError("evaluate: channel id list does not match input width");
                for (int c = 0; c < channels; ++c)
                    decision[static_cast<size_t>(data.channels[static_cast<size_t>(c)])] =
                        bits[c] > 0.5 ? 1 : 0;
            } else if (channels == kFullChannels) {
                for (int c = 0; c < channels; ++c) decision[static_cast<size_t>(c)] = bits[c] > 0.5 ? 1 : 0;
            }
            out.decisions.push_back(std::move(decision));
        } else {
            bits_sum += static_cast<double>(channels);
        }
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    out.mean_loss = loss_sum / static_cast<double>(data.size());
    out.mean_channels_on = bits_sum / static_cast<double>(data.size());
    return out;
}

}  // namespace fdl
