#pragma once

#include <cstdint>
#include <vector>

#include "fdl/graph.hpp"
#include "fdl/rng.hpp"
#include "fdl/tensor.hpp"

namespace fdl {

// Trainable state of the channel-selection gate: a two-layer SE block over
// the pooled channel vector, then per-channel (off, on) score heads made of
// two scalars each. The off score comes first: scores (7.5, 2.5) mean a 75%
// chance the channel is turned off.
struct GateParams {
    Tensor w1, b1;      // channels x hidden, hidden
    Tensor w2, b2;      // hidden x channels, channels
    Tensor alpha, beta; // per-channel off/on heads, channels each
    double tau = 1.0;
    double lambda = 0.0;
    int channels = 0;
    int hidden = 0;
    int reduction = 16;

    static GateParams init(int channels, int reduction, double tau, double lambda, Rng& rng);
};

struct ScorePairs {
    Eigen::ArrayXd off, on;  // strictly positive
};

struct GateDecision {
    std::vector<std::uint8_t> bits;      // hard decisions, argmax of the noisy logits
    Eigen::ArrayXd p_on;                 // pi_on / (pi_off + pi_on)
    Eigen::ArrayXd noise_off, noise_on;  // recorded standard Gumbel draws
    Eigen::ArrayXd soft_on;              // softmax relaxation of the on branch

    int on_count() const;
};

// Standard Gumbel deviate: -log(-log(U)), with U clamped away from {0,1}.
double gumbel_from_uniform(double u);
double gumbel_standard(Rng& rng);

// SE squeeze + two-score heads: s = pool(x); e = W2 relu(W1 s + b1) + b2;
// scores are softplus(alpha_i e_i), softplus(beta_i e_i).
ScorePairs gate_scores(const Tensor& x, const GateParams& params);

// Gumbel-max sample of Bern(p_on) per channel at temperature tau. Records the
// noise and the softmax relaxation so the draw can be replayed for backward.
GateDecision gate_sample(const ScorePairs& scores, double tau, Rng& rng);

// Deterministic decision: bit_i = [p_i > 0.5].
GateDecision gate_threshold(const ScorePairs& scores);

// Channel i multiplied by its hard bit; unselected channels become all-zero.
Tensor gate_apply(const Tensor& x, const GateDecision& decision);

// lambda * sum of hard bits.
double selection_regularizer(const GateDecision& decision, double lambda);

enum class GateInference { kSample, kThreshold };
GateInference gate_inference_from_name(const std::string& name);
const char* gate_inference_name(GateInference m);
GateDecision gate_decide(const Tensor& x, const GateParams& params, GateInference mode, Rng& rng);

// Gate subgraph wired onto an existing input node. The Gumbel noise enters
// through two input nodes so a recorded draw can be replayed exactly; `hard`
// selects the straight-through forward (training) versus the fully
// differentiable soft relaxation (gradient checking).
struct GateNodes {
    NodeId noise_off = -1, noise_on = -1;
    NodeId p_on = -1;      // linear normalization pi_on / (pi_off + pi_on)
    NodeId soft_on = -1;   // temperature-controlled relaxation
    NodeId bits = -1;
    NodeId gated = -1;
    NodeId reg = -1;       // lambda * sum(bits)
    NodeId tau_scale = -1; // scale node holding 1/tau, adjustable for annealing
    std::vector<NodeId> params;  // w1, b1, w2, b2, alpha, beta
};

GateNodes attach_gate(Graph& g, NodeId x, const GateParams& params, bool hard);

// Loads a sampled decision's noise into the gate's input nodes.
void set_gate_noise(Graph& g, const GateNodes& nodes, const Eigen::ArrayXd& noise_off,
                    const Eigen::ArrayXd& noise_on);

}  // namespace fdl
