#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fdl/gate.hpp"
#include "fdl/graph.hpp"
#include "fdl/rng.hpp"

namespace fdl {

struct ModelSpec {
    enum class Kind { kFreq, kSpatial };

    Kind kind = Kind::kFreq;
    int input_h = 8;
    int input_w = 8;
    int input_c = 192;
    int classes = 4;
    bool gate = false;
    int gate_reduction = 16;
    double tau = 1.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
};

const char* model_kind_name(ModelSpec::Kind k);
ModelSpec::Kind model_kind_from_name(const std::string& name);

struct Model {
    ModelSpec spec;
    Graph graph;
    NodeId input = -1;
    NodeId logits = -1;
    NodeId xent = -1;
    NodeId loss = -1;  // xent plus the selection regularizer when gated
    bool has_gate = false;
    GateNodes gate;
    std::vector<NodeId> params;
    std::vector<std::string> roles;  // parallel to params
};

// Frequency-input network: no strided stem, the first conv consumes the
// packed DCT channels directly. Optional gate sits on the raw input tensor.
//   [gate] -> conv3x3(C -> 32, s1, p1) -> relu -> conv3x3(32 -> 32, s1, p1)
//   -> relu -> global_avg_pool -> dense(32 -> K)
Model build_freqnet(const ModelSpec& spec);

// Spatial baseline with a strided stem, capacity within 25% of the freqnet:
//   conv3x3(3 -> 16, s2, p1) -> relu -> conv3x3(16 -> 32, s2, p1) -> relu ->
//   conv3x3(32 -> 32, s1, p1) -> relu -> global_avg_pool -> dense(32 -> K)
Model build_spatialnet(const ModelSpec& spec);

long long parameter_count(const Model& m);

struct TrainConfig {
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 4e-5;
    int epochs = 40;
    int batch_size = 32;
    double lr_decay = 0.1;
    int lr_decay_interval = 20;
    bool anneal_tau = false;  // exponential anneal of tau down to 0.5 over the run
    std::uint64_t seed = 0;
};

// lr at epoch e (0-based) = lr * lr_decay^floor(e / lr_decay_interval)
double scheduled_lr(const TrainConfig& cfg, int epoch);

struct LabeledData {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
    std::vector<int> channels;  // global channel ids for frequency inputs; empty for spatial

    size_t size() const { return inputs.size(); }
};

struct EpochMetrics {
    int epoch = 0;
    std::string split;  // "train" | "val"
    double loss = 0;
    double accuracy = 0;
    double mean_channels_on = 0;
    double lr = 0;
};

std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics);

struct TrainResult {
    std::vector<EpochMetrics> metrics;
};

// Minibatch SGD with momentum and weight decay; deterministic for a fixed
// seed (fixed shuffle, fixed per-sample gumbel streams, in-order reduction).
// Throws DomainError naming epoch/batch if the loss goes non-finite.
TrainResult train(Model& model, const LabeledData& train_data, const LabeledData* val_data,
                  const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0;
    double mean_loss = 0;
    double mean_channels_on = 0;
    std::vector<std::vector<std::uint8_t>> decisions;  // length-192 vectors, gated models only
};

// Threshold mode zeroes the gumbel noise (bit_i = [p_i > 0.5]); sample mode
// draws one decision per input from a per-sample stream of `seed`.
EvalResult evaluate(Model& model, const LabeledData& data, GateInference mode,
                    std::uint64_t seed = 0);

}  // namespace fdl
