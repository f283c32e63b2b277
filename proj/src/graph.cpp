#include "fdl/graph.hpp"

#include <cmath>

namespace fdl {

namespace {

double softplus_scalar(double x) {
    // Overflow-safe form: for large x this is x + log1p(exp(-x)) ~ x.
    double y = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    // softplus is strictly positive; keep a floor so a later log stays finite
    // even deep in the left tail where exp underflows.
    return y > 1e-300 ? y : 1e-300;
}

double sigmoid_scalar(double x) { return x > 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    forward_ran_ = false;
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_id(NodeId id) const {
    if (id < 0 || id >= size()) throw StateError("graph: node id out of range");
}

NodeId Graph::input(std::vector<int> dims, std::string name) {
    Node n;
    n.op = Op::kInput;
    n.value = Tensor(std::move(dims));
    n.name = std::move(name);
    return push(std::move(n));
}

NodeId Graph::param(Tensor init, std::string name) {
    Node n;
    n.op = Op::kParam;
    n.value = std::move(init);
    n.name = std::move(name);
    return push(std::move(n));
}

std::vector<int> Graph::conv_out_dims(const std::vector<int>& x, const std::vector<int>& k, int stride,
                                      int padding) {
    if (x.size() != 3 || k.size() != 4) throw ShapeError("conv2d: input must be HxWxC, kernels KxKxCinxCout");
    if (k[0] != k[1]) throw ShapeError("conv2d: kernels must be square");
    if (x[2] != k[2]) throw ShapeError("conv2d: input channels do not match kernel Cin");
    if (stride < 1) throw ShapeError("conv2d: stride must be positive");
    if (padding < 0) throw ShapeError("conv2d: padding must be nonnegative");
    const int kk = k[0];
    if (kk > x[0] + 2 * padding || kk > x[1] + 2 * padding)
        throw ShapeError("conv2d: kernel larger than padded input");
    const int oh = (x[0] + 2 * padding - kk) / stride + 1;
    const int ow = (x[1] + 2 * padding - kk) / stride + 1;
    return {oh, ow, k[3]};
}

NodeId Graph::conv2d(NodeId x, NodeId kernels, int stride, int padding) {
    check_id(x);
    check_id(kernels);
    Node n;
    n.op = Op::kConv2d;
    n.in = {x, kernels, -1};
    n.stride = stride;
    n.padding = padding;
    n.value = Tensor(conv_out_dims(nodes_[(size_t)x].value.dims(), nodes_[(size_t)kernels].value.dims(), stride,
                                   padding));
    return push(std::move(n));
}

NodeId Graph::dense(NodeId x, NodeId weights, NodeId bias) {
    check_id(x);
    check_id(weights);
    check_id(bias);
    const Tensor& xv = nodes_[(size_t)x].value;
    const Tensor& wv = nodes_[(size_t)weights].value;
    const Tensor& bv = nodes_[(size_t)bias].value;
    if (wv.rank() != 2) throw ShapeError("dense: weights must be n x m");
    if (xv.size() != wv.dim(0)) throw ShapeError("dense: input length does not match weight rows");
    if (bv.size() != wv.dim(1)) throw ShapeError("dense: bias length does not match weight cols");
    Node n;
    n.op = Op::kDense;
    n.in = {x, weights, bias};
    n.value = Tensor({wv.dim(1)});
    return push(std::move(n));
}

NodeId Graph::global_avg_pool(NodeId x) {
    check_id(x);
    const Tensor& xv = nodes_[(size_t)x].value;
    if (xv.rank() != 3) throw ShapeError("global_avg_pool: input must be HxWxC");
    Node n;
    n.op = Op::kGlobalAvgPool;
    n.in = {x, -1, -1};
    n.value = Tensor({xv.dim(2)});
    return push(std::move(n));
}

NodeId Graph::relu(NodeId x) {
    check_id(x);
    Node n;
    n.op = Op::kRelu;
    n.in = {x, -1, -1};
    n.value = Tensor(nodes_[(size_t)x].value.dims());
    return push(std::move(n));
}

NodeId Graph::softplus(NodeId x) {
    check_id(x);
    Node n;
    n.op = Op::kSoftplus;
    n.in = {x, -1, -1};
    n.value = Tensor(nodes_[(size_t)x].value.dims());
    return push(std::move(n));
}

NodeId Graph::log(NodeId x) {
    check_id(x);
    Node n;
    n.op = Op::kLog;
    n.in = {x, -1, -1};
    n.value = Tensor(nodes_[(size_t)x].value.dims());
    return push(std::move(n));
}

NodeId Graph::exp(NodeId x) {
    check_id(x);
    Node n;
    n.op = Op::kExp;
    n.in = {x, -1, -1};
    n.value = Tensor(nodes_[(size_t)x].value.dims());
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    if (!nodes_[(size_t)a].value.same_dims(nodes_[(size_t)b].value)) throw ShapeError("add: shape mismatch");
    Node n;
    n.op = Op::kAdd;
    n.in = {a, b, -1};
    n.value = Tensor(nodes_[(size_t)a].value.dims());
    return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    if (!nodes_[(size_t)a].value.same_dims(nodes_[(size_t)b].value)) throw ShapeError("mul: shape mismatch");
    Node n;
    n.op = Op::kMul;
    n.in = {a, b, -1};
    n.value = Tensor(nodes_[(size_t)a].value.dims());
    return push(std::move(n));
}

NodeId Graph::scale(NodeId x, double factor) {
    check_id(x);
    Node n;
    n.op = Op::kScale;
    n.in = {x, -1, -1};
    n.factor = factor;
    n.value = Tensor(nodes_[(size_t)x].value.dims());
    return push(std::move(n));
}

NodeId Graph::add_channel(NodeId x, NodeId bias) {
    check_id(x);
    check_id(bias);
    const Tensor& xv = nodes_[(size_t)x].value;
    const Tensor& bv = nodes_[(size_t)bias].value;
    if (xv.rank() != 3 || bv.size() != xv.dim(2)) throw ShapeError("add_channel: need HxWxC and C");
    Node n;
    n.op = Op::kAddChannel;
    n.in = {x, bias, -1};
    n.value = Tensor(xv.dims());
    return push(std::move(n));
}

NodeId Graph::mul_channel(NodeId x, NodeId scales) {
    check_id(x);
    check_id(scales);
    const Tensor& xv = nodes_[(size_t)x].value;
    const Tensor& sv = nodes_[(size_t)scales].value;
    if (xv.rank() != 3 || sv.size() != xv.dim(2)) throw ShapeError("mul_channel: need HxWxC and C");
    Node n;
    n.op = Op::kMulChannel;
    n.in = {x, scales, -1};
    n.value = Tensor(xv.dims());
    return push(std::move(n));
}

NodeId Graph::sum(NodeId x) {
    check_id(x);
    Node n;
    n.op = Op::kSum;
    n.in = {x, -1, -1};
    n.value = Tensor({1});
    return push(std::move(n));
}

NodeId Graph::softmax_xent(NodeId logits, int label) {
    check_id(logits);
    const Tensor& lv = nodes_[(size_t)logits].value;
    if (lv.rank() != 1) throw ShapeError("softmax_xent: logits must be rank 1");
    if (label < 0 || label >= lv.dim(0)) throw std::out_of_range("softmax_xent: label out of range");
    Node n;
    n.op = Op::kSoftmaxXent;
    n.in = {logits, -1, -1};
    n.label = label;
    n.value = Tensor({1});
    return push(std::move(n));
}

NodeId Graph::hard_gate(NodeId soft, bool hard) {
    check_id(soft);
    Node n;
    n.op = Op::kHardGate;
    n.in = {soft, -1, -1};
    n.hard = hard;
    n.value = Tensor(nodes_[(size_t)soft].value.dims());
    return push(std::move(n));
}

void Graph::set_value(NodeId id, Tensor v) {
    check_id(id);
    Node& n = nodes_[(size_t)id];
    if (n.op != Op::kInput && n.op != Op::kParam) throw StateError("set_value: not an input or param node");
    if (!n.value.same_dims(v)) throw ShapeError("set_value: shape mismatch");
    n.value = std::move(v);
    forward_ran_ = false;
}

void Graph::set_label(NodeId id, int label) {
    check_id(id);
    Node& n = nodes_[(size_t)id];
    if (n.op != Op::kSoftmaxXent) throw StateError("set_label: not a softmax_xent node");
    const Tensor& lv = in_value(n, 0);
    if (label < 0 || label >= lv.dim(0)) throw std::out_of_range("softmax_xent: label out of range");
    n.label = label;
    forward_ran_ = false;
}

void Graph::set_hard(NodeId id, bool hard) {
    check_id(id);
    Node& n = nodes_[(size_t)id];
    if (n.op != Op::kHardGate) throw StateError("set_hard: not a hard_gate node");
    n.hard = hard;
    forward_ran_ = false;
}

void Graph::set_factor(NodeId id, double factor) {
    check_id(id);
    Node& n = nodes_[(size_t)id];
    if (n.op != Op::kScale) throw StateError("set_factor: not a scale node");
    n.factor = factor;
    forward_ran_ = false;
}

void Graph::eval(Node& n) {
    switch (n.op) {
        case Op::kInput:
        case Op::kParam:
            return;
        case Op::kConv2d: {
            const Tensor& x = in_value(n, 0);
            const Tensor& k = in_value(n, 1);
            const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
            const int kk = k.dim(0), cout = k.dim(3);
            const int oh = n.value.dim(0), ow = n.value.dim(1);
            const int s = n.stride, p = n.padding;
            // im2col: one row per output position, one column per (ki,kj,ci).
            n.scratch.resize(static_cast<Eigen::Index>(oh) * ow, static_cast<Eigen::Index>(kk) * kk * cin);
            n.scratch.setZero();
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const Eigen::Index row = static_cast<Eigen::Index>(oy) * ow + ox;
                    for (int ki = 0; ki < kk; ++ki) {
                        const int iy = oy * s - p + ki;
                        if (iy < 0 || iy >= h) continue;
                        for (int kj = 0; kj < kk; ++kj) {
                            const int ix = ox * s - p + kj;
                            if (ix < 0 || ix >= w) continue;
                            const Eigen::Index col0 = (static_cast<Eigen::Index>(ki) * kk + kj) * cin;
                            const Eigen::Index src = (static_cast<Eigen::Index>(iy) * w + ix) * cin;
                            for (int ci = 0; ci < cin; ++ci)
                                n.scratch(row, col0 + ci) = x.array()[src + ci];
                        }
                    }
                }
            }
            auto kmat = as_matrix(k, static_cast<Eigen::Index>(kk) * kk * cin, cout);
            auto out = as_matrix(n.value, static_cast<Eigen::Index>(oh) * ow, cout);
            out.noalias() = n.scratch * kmat;
            return;
        }
        case Op::kDense: {
            const Tensor& x = in_value(n, 0);
            const Tensor& wt = in_value(n, 1);
            const Tensor& b = in_value(n, 2);
            auto wmat = as_matrix(wt, wt.dim(0), wt.dim(1));
            Eigen::Map<const Eigen::VectorXd> xv(x.array().data(), x.size());
            Eigen::Map<Eigen::VectorXd> ov(n.value.array().data(), n.value.size());
            ov.noalias() = wmat.transpose() * xv;
            ov += Eigen::Map<const Eigen::VectorXd>(b.array().data(), b.size());
            return;
        }
        case Op::kGlobalAvgPool: {
            const Tensor& x = in_value(n, 0);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto xm = as_matrix(x, hw, x.dim(2));
            Eigen::Map<Eigen::VectorXd> ov(n.value.array().data(), n.value.size());
            ov = xm.colwise().sum().transpose() / static_cast<double>(hw);
            return;
        }
        case Op::kRelu:
            n.value.array() = in_value(n, 0).array().max(0.0);
            return;
        case Op::kSoftplus: {
            const auto& x = in_value(n, 0).array();
            for (Eigen::Index i = 0; i < x.size(); ++i) n.value.array()[i] = softplus_scalar(x[i]);
            return;
        }
        case Op::kLog: {
            const auto& x = in_value(n, 0).array();
            if ((x <= 0.0).any()) throw DomainError("log: nonpositive input at node '" + n.name + "'");
            n.value.array() = x.log();
            return;
        }
        case Op::kExp:
            n.value.array() = in_value(n, 0).array().exp();
            return;
        case Op::kAdd:
            n.value.array() = in_value(n, 0).array() + in_value(n, 1).array();
            return;
        case Op::kMul:
            n.value.array() = in_value(n, 0).array() * in_value(n, 1).array();
            return;
        case Op::kScale:
            n.value.array() = in_value(n, 0).array() * n.factor;
            return;
        case Op::kAddChannel: {
            const Tensor& x = in_value(n, 0);
            const Tensor& b = in_value(n, 1);
            const int c = x.dim(2);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto xm = as_matrix(x, hw, c);
            auto om = as_matrix(n.value, hw, c);
            for (int j = 0; j < c; ++j) om.col(j) = xm.col(j).array() + b.array()[j];
            return;
        }
        case Op::kMulChannel: {
            const Tensor& x = in_value(n, 0);
            const Tensor& s = in_value(n, 1);
            const int c = x.dim(2);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto xm = as_matrix(x, hw, c);
            auto om = as_matrix(n.value, hw, c);
            for (int j = 0; j < c; ++j) om.col(j) = xm.col(j) * s.array()[j];
            return;
        }
        case Op::kSum:
            n.value.array()[0] = in_value(n, 0).array().sum();
            return;
        case Op::kSoftmaxXent: {
            const auto& logits = in_value(n, 0).array();
            const double m = logits.maxCoeff();
            Eigen::ArrayXd e = (logits - m).exp();
            const double z = e.sum();
            n.scratch.resize(e.size(), 1);
            n.scratch.col(0) = (e / z).matrix();
            n.value.array()[0] = -(logits[n.label] - m - std::log(z));
            return;
        }
        case Op::kHardGate: {
            const auto& y = in_value(n, 0).array();
            if (n.hard)
                n.value.array() = (y > 0.5).cast<double>();
            else
                n.value.array() = y;
            return;
        }
    }
}

void Graph::forward() {
    for (Node& n : nodes_) {
        eval(n);
        if (n.op != Op::kInput && n.op != Op::kParam && !n.value.all_finite())
            throw DomainError("forward: non-finite value at node " + std::to_string(&n - nodes_.data()) +
                              (n.name.empty() ? "" : " ('" + n.name + "')"));
    }
    forward_ran_ = true;
}

void Graph::zero_grad() {
    for (Node& n : nodes_) n.grad = Tensor();
}

void Graph::backward(NodeId loss) {
    check_id(loss);
    if (!forward_ran_) throw StateError("backward: forward() has not run since the last graph change");
    if (nodes_[(size_t)loss].value.size() != 1) throw ShapeError("backward: loss must be a scalar node");

    // Non-leaf gradients are scoped to this call; param gradients accumulate.
    for (Node& n : nodes_) {
        if (n.op == Op::kParam) {
            if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.dims());
        } else {
            n.grad = Tensor(n.value.dims());
        }
    }
    nodes_[(size_t)loss].grad.array()[0] += 1.0;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) backprop(*it);
}

void Graph::backprop(Node& n) {
    auto gin = [&](int slot) -> Tensor& { return nodes_[(size_t)n.in[(size_t)slot]].grad; };
    const auto& g = n.grad.array();
    switch (n.op) {
        case Op::kInput:
        case Op::kParam:
            return;
        case Op::kConv2d: {
            const Tensor& x = in_value(n, 0);
            const Tensor& k = in_value(n, 1);
            const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
            const int kk = k.dim(0), cout = k.dim(3);
            const int oh = n.value.dim(0), ow = n.value.dim(1);
            const int s = n.stride, p = n.padding;
            auto gout = as_matrix(n.grad, static_cast<Eigen::Index>(oh) * ow, cout);
            // Kernel gradient reuses the forward im2col.
            auto gk = as_matrix(gin(1), static_cast<Eigen::Index>(kk) * kk * cin, cout);
            gk.noalias() += n.scratch.transpose() * gout;
            // Input gradient: dcol = gout * k^T, scattered back (col2im).
            auto kmat = as_matrix(k, static_cast<Eigen::Index>(kk) * kk * cin, cout);
            Eigen::MatrixXd dcol = gout * kmat.transpose();
            Tensor& gx = gin(0);
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const Eigen::Index row = static_cast<Eigen::Index>(oy) * ow + ox;
                    for (int ki = 0; ki < kk; ++ki) {
                        const int iy = oy * s - p + ki;
                        if (iy < 0 || iy >= h) continue;
                        for (int kj = 0; kj < kk; ++kj) {
                            const int ix = ox * s - p + kj;
                            if (ix < 0 || ix >= w) continue;
                            const Eigen::Index col0 = (static_cast<Eigen::Index>(ki) * kk + kj) * cin;
                            const Eigen::Index dst = (static_cast<Eigen::Index>(iy) * w + ix) * cin;
                            for (int ci = 0; ci < cin; ++ci)
                                gx.array()[dst + ci] += dcol(row, col0 + ci);
                        }
                    }
                }
            }
            return;
        }
        case Op::kDense: {
            const Tensor& x = in_value(n, 0);
            const Tensor& wt = in_value(n, 1);
            Eigen::Map<const Eigen::VectorXd> xv(x.array().data(), x.size());
            Eigen::Map<const Eigen::VectorXd> gv(n.grad.array().data(), n.grad.size());
            auto wmat = as_matrix(wt, wt.dim(0), wt.dim(1));
            Eigen::Map<Eigen::VectorXd> gx(gin(0).array().data(), gin(0).size());
            gx.noalias() += wmat * gv;
            auto gw = as_matrix(gin(1), wt.dim(0), wt.dim(1));
            gw.noalias() += xv * gv.transpose();
            gin(2).array() += n.grad.array();
            return;
        }
        case Op::kGlobalAvgPool: {
            const Tensor& x = in_value(n, 0);
            const int c = x.dim(2);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto gx = as_matrix(gin(0), hw, c);
            for (int j = 0; j < c; ++j) gx.col(j).array() += g[j] / static_cast<double>(hw);
            return;
        }
        case Op::kRelu:
            gin(0).array() += g * (in_value(n, 0).array() > 0.0).cast<double>();
            return;
        case Op::kSoftplus: {
            const auto& x = in_value(n, 0).array();
            for (Eigen::Index i = 0; i < x.size(); ++i) gin(0).array()[i] += g[i] * sigmoid_scalar(x[i]);
            return;
        }
        case Op::kLog:
            gin(0).array() += g / in_value(n, 0).array();
            return;
        case Op::kExp:
            gin(0).array() += g * n.value.array();
            return;
        case Op::kAdd:
            gin(0).array() += g;
            gin(1).array() += g;
            return;
        case Op::kMul:
            gin(0).array() += g * in_value(n, 1).array();
            gin(1).array() += g * in_value(n, 0).array();
            return;
        case Op::kScale:
            gin(0).array() += g * n.factor;
            return;
        case Op::kAddChannel: {
            gin(0).array() += g;
            const Tensor& x = in_value(n, 0);
            const int c = x.dim(2);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto gm = as_matrix(n.grad, hw, c);
            for (int j = 0; j < c; ++j) gin(1).array()[j] += gm.col(j).sum();
            return;
        }
        case Op::kMulChannel: {
            const Tensor& x = in_value(n, 0);
            const Tensor& s = in_value(n, 1);
            const int c = x.dim(2);
            const Eigen::Index hw = static_cast<Eigen::Index>(x.dim(0)) * x.dim(1);
            auto gm = as_matrix(n.grad, hw, c);
            auto gx = as_matrix(gin(0), hw, c);
            auto xm = as_matrix(x, hw, c);
            for (int j = 0; j < c; ++j) {
                gx.col(j) += gm.col(j) * s.array()[j];
                gin(1).array()[j] += gm.col(j).dot(xm.col(j));
            }
            return;
        }
        case Op::kSum:
            gin(0).array() += g[0];
            return;
        case Op::kSoftmaxXent: {
            const double gl = g[0];
            auto& gx = gin(0).array();
            gx += gl * n.scratch.col(0).array();
            gx[n.label] -= gl;
            return;
        }
        case Op::kHardGate:
            // Straight-through: the gradient passes to the soft relaxation
            // unchanged, whether the forward emitted hard bits or not.
            gin(0).array() += g;
            return;
    }
}

std::vector<NodeId> Graph::params() const {
    std::vector<NodeId> out;
    for (int i = 0; i < size(); ++i)
        if (nodes_[(size_t)i].op == Op::kParam) out.push_back(i);
    return out;
}

void sgd_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, std::vector<Tensor>& velocities,
              double lr, double momentum, double weight_decay) {
    if (lr < 0) throw ConfigError("sgd_step: lr must be >= 0");
    if (momentum < 0 || momentum >= 1) throw ConfigError("sgd_step: momentum must be in [0, 1)");
    if (params.size() != grads.size()) throw ShapeError("sgd_step: params/grads count mismatch");
    if (velocities.size() != params.size()) velocities.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_dims(grads[i])) throw ShapeError("sgd_step: param/grad shape mismatch");
        if (velocities[i].size() != params[i].size()) velocities[i] = Tensor(params[i].dims());
        velocities[i].array() =
            momentum * velocities[i].array() + grads[i].array() + weight_decay * params[i].array();
        params[i].array() -= lr * velocities[i].array();
    }
}

double rel_err(double a, double b) {
    // Central differences at h=1e-6 carry ~1e-10 * |loss| of roundoff, so
    // absolute differences at that scale count as agreement; otherwise a
    // genuinely zero analytic gradient would read as a full relative error.
    if (std::abs(a - b) <= 1e-7) return 0.0;
    return std::abs(a - b) / (std::abs(a) + std::abs(b));
}

GradCheckReport grad_check(Graph& g, NodeId loss, double h) {
    g.forward();
    g.zero_grad();
    g.backward(loss);

    const std::vector<NodeId> params = g.params();
    std::vector<Eigen::ArrayXd> analytic;
    analytic.reserve(params.size());
    for (NodeId p : params) analytic.push_back(g.grad(p).array());

    GradCheckReport report;
    double total = 0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& theta = g.mutable_value(params[pi]);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double saved = theta.array()[i];
            theta.array()[i] = saved + h;
            g.forward();
            const double lp = g.value(loss).scalar_value();
            theta.array()[i] = saved - h;
            g.forward();
            const double lm = g.value(loss).scalar_value();
            theta.array()[i] = saved;
            const double fd = (lp - lm) / (2 * h);
            const double err = rel_err(analytic[pi][i], fd);
            total += err;
            ++report.checked;
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_param = params[pi];
                report.worst_index = i;
            }
        }
    }
    g.forward();  // restore consistent forward values
    report.mean_rel_err = report.checked ? total / static_cast<double>(report.checked) : 0.0;
    return report;
}

}  // namespace fdl
