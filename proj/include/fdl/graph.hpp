#pragma once

#include <array>
#include <string>
#include <vector>

#include "fdl/tensor.hpp"

namespace fdl {

// The op set is closed and minimal: the network/gate primitives plus
// elementwise add/mul, scalar scaling, channel broadcast, and a full-sum
// reduce. Anything else is composed from these.
enum class Op {
    kInput,        // externally supplied value, no gradient
    kParam,        // trainable leaf
    kConv2d,       // in: x (HxWxCin), kernels (KxKxCinxCout); zero padding
    kDense,        // in: x (flattened n), weights (n x m), bias (m)
    kGlobalAvgPool,// HxWxC -> C
    kRelu,
    kSoftplus,
    kLog,
    kExp,
    kAdd,          // same-shape elementwise
    kMul,          // same-shape elementwise
    kScale,        // multiply by a constant factor
    kAddChannel,   // x (HxWxC) + b (C), broadcast over H,W
    kMulChannel,   // x (HxWxC) * s (C), broadcast over H,W
    kSum,          // sum of all elements -> scalar
    kSoftmaxXent,  // logits (K) + label attribute -> scalar loss
    kHardGate,     // forward binarizes at 0.5 (or passes through when soft);
                   // backward is the straight-through identity either way
};

using NodeId = int;

struct Node {
    Op op = Op::kInput;
    std::array<NodeId, 3> in{-1, -1, -1};
    Tensor value;
    Tensor grad;
    // Attributes (op-dependent).
    int stride = 1;
    int padding = 0;
    int label = 0;     // kSoftmaxXent
    double factor = 1; // kScale
    bool hard = true;  // kHardGate
    std::string name;
    // Scratch kept between forward and backward (im2col matrix for conv,
    // softmax probabilities for xent).
    Eigen::MatrixXd scratch;
};

// Reverse-mode tape. Nodes are appended in construction order, which is by
// definition topological; forward() evaluates them once in that order and
// backward() walks the reverse order, so each node is visited exactly once.
//
// Gradients of non-leaf nodes are reset by every backward() call; gradients
// of kParam leaves accumulate across backward() calls until zero_grad(), so
// minibatch gradients are a plain sum in sample order.
class Graph {
public:
    NodeId input(std::vector<int> dims, std::string name = "");
    NodeId param(Tensor init, std::string name = "");

    NodeId conv2d(NodeId x, NodeId kernels, int stride, int padding);
    NodeId dense(NodeId x, NodeId weights, NodeId bias);
    NodeId global_avg_pool(NodeId x);
    NodeId relu(NodeId x);
    NodeId softplus(NodeId x);
    NodeId log(NodeId x);
    NodeId exp(NodeId x);
    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId x, double factor);
    NodeId add_channel(NodeId x, NodeId bias);
    NodeId mul_channel(NodeId x, NodeId scales);
    NodeId sum(NodeId x);
    NodeId softmax_xent(NodeId logits, int label);
    NodeId hard_gate(NodeId soft, bool hard = true);

    void set_value(NodeId id, Tensor v);
    void set_label(NodeId id, int label);
    void set_hard(NodeId id, bool hard);
    void set_factor(NodeId id, double factor);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor& grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].grad; }
    Tensor& mutable_value(NodeId id) { return nodes_[static_cast<size_t>(id)].value; }
    const std::string& name(NodeId id) const { return nodes_[static_cast<size_t>(id)].name; }
    Op op(NodeId id) const { return nodes_[static_cast<size_t>(id)].op; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Recomputes every non-leaf node. Throws DomainError naming the node if a
    // forward value comes out non-finite.
    void forward();

    // Accumulates d(loss)/d(leaf) for every kParam leaf. The loss must be a
    // scalar node and forward() must have run since the last graph edit.
    void backward(NodeId loss);

    void zero_grad();

    std::vector<NodeId> params() const;

    bool forward_ran() const { return forward_ran_; }

private:
    NodeId push(Node n);
    const Tensor& in_value(const Node& n, int slot) const {
        return nodes_[static_cast<size_t>(n.in[static_cast<size_t>(slot)])].value;
    }
    void eval(Node& n);
    void backprop(Node& n);
    static std::vector<int> conv_out_dims(const std::vector<int>& x, const std::vector<int>& k, int stride,
                                          int padding);
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
    bool forward_ran_ = false;
};

// v <- momentum * v + grad + weight_decay * param; param <- param - lr * v.
// Shapes of params/grads/velocities must agree elementwise.
void sgd_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, std::vector<Tensor>& velocities,
              double lr, double momentum, double weight_decay);

// Symmetric relative error |a - b| / (|a| + |b|); differences at or below
// 1e-7 count as agreement (the roundoff floor of central differences).
double rel_err(double a, double b);

struct GradCheckReport {
    double max_rel_err = 0;
    double mean_rel_err = 0;
    long long checked = 0;
    NodeId worst_param = -1;
    Eigen::Index worst_index = -1;
};

// Compares analytic gradients with central finite differences (step h) for
// every element of every kParam leaf. Leaves graph values as found.
GradCheckReport grad_check(Graph& g, NodeId loss, double h = 1e-6);

}  // namespace fdl
