#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <vector>

#include "fdl/error.hpp"

namespace fdl {

// Dense tensor of doubles in row-major order (last index fastest). Rank is
// dynamic. Storage is an Eigen array so elementwise expressions stay cheap;
// matrix views are taken with Eigen::Map where an operation wants GEMM.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> dims)
        : dims_(std::move(dims)), data_(Eigen::ArrayXd::Zero(checked_size(dims_))) {}

    Tensor(std::vector<int> dims, Eigen::ArrayXd values) : dims_(std::move(dims)), data_(std::move(values)) {
        if (data_.size() != checked_size(dims_)) throw ShapeError("tensor: data length does not match dims");
    }

    static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }

    static Tensor constant(std::vector<int> dims, double v) {
        Tensor t(std::move(dims));
        t.data_.setConstant(v);
        return t;
    }

    static Tensor scalar(double v) { return constant({1}, v); }

    static Tensor from(std::vector<int> dims, std::initializer_list<double> values) {
        Tensor t(std::move(dims));
        if (static_cast<Eigen::Index>(values.size()) != t.size())
            throw ShapeError("tensor: initializer length does not match dims");
        Eigen::Index i = 0;
        for (double v : values) t.data_[i++] = v;
        return t;
    }

    int rank() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
    Eigen::Index size() const { return data_.size(); }

    double operator[](Eigen::Index i) const { return data_[i]; }
    double& operator[](Eigen::Index i) { return data_[i]; }

    double operator()(int i) const { return data_[flat1(i)]; }
    double& operator()(int i) { return data_[flat1(i)]; }
    double operator()(int i, int j) const { return data_[flat2(i, j)]; }
    double& operator()(int i, int j) { return data_[flat2(i, j)]; }
    double operator()(int i, int j, int k) const { return data_[flat3(i, j, k)]; }
    double& operator()(int i, int j, int k) { return data_[flat3(i, j, k)]; }
    double operator()(int i, int j, int k, int l) const { return data_[flat4(i, j, k, l)]; }
    double& operator()(int i, int j, int k, int l) { return data_[flat4(i, j, k, l)]; }

    Eigen::ArrayXd& array() { return data_; }
    const Eigen::ArrayXd& array() const { return data_; }

    bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }
    bool all_finite() const { return data_.isFinite().all(); }

    double scalar_value() const {
        if (size() != 1) throw ShapeError("tensor: scalar_value on non-scalar");
        return data_[0];
    }

    static Eigen::Index checked_size(const std::vector<int>& dims) {
        Eigen::Index n = 1;
        for (int d : dims) {
            if (d <= 0) throw ShapeError("tensor: nonpositive extent");
            n *= d;
        }
        return n;
    }

private:
    Eigen::Index flat1(int i) const { return i; }
    Eigen::Index flat2(int i, int j) const { return static_cast<Eigen::Index>(i) * dims_[1] + j; }
    Eigen::Index flat3(int i, int j, int k) const {
        return (static_cast<Eigen::Index>(i) * dims_[1] + j) * dims_[2] + k;
    }
    Eigen::Index flat4(int i, int j, int k, int l) const {
        return ((static_cast<Eigen::Index>(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l;
    }

    std::vector<int> dims_;
    Eigen::ArrayXd data_;
};

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

// Row-major matrix view of a tensor's storage, rows x cols = size.
inline ConstMapRM as_matrix(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != t.size()) throw ShapeError("as_matrix: element count mismatch");
    return ConstMapRM(t.array().data(), rows, cols);
}

inline MapRM as_matrix(Tensor& t, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != t.size()) throw ShapeError("as_matrix: element count mismatch");
    return MapRM(t.array().data(), rows, cols);
}

}  // namespace fdl
