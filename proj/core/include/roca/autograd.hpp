#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. Every value is a 2-D matrix; sequences and batches are laid out
// as stacked rows (row index = batch * steps + step), which makes flattening
// a free reshape.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace roca::ag {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using ColVector = Eigen::Matrix<double, Eigen::Dynamic, 1>;

struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward_fn;

    void accumulate(const Matrix& g);
};

/// Handle to a node in the computation graph. Copies share the node.
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    const Matrix& value() const { return node_->value; }
    Matrix& mutable_value() { return node_->value; }
    const Matrix& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool has_grad() const { return node_ && node_->grad.size() > 0; }
    void zero_grad() { node_->grad.resize(0, 0); }

    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    double scalar() const { return node_->value(0, 0); }

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

private:
    std::shared_ptr<Node> node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);

/// Runs reverse accumulation from a 1x1 root. Gradients add into every
/// reachable node that requires them.
void backward(const Var& root);

// Elementwise and linear algebra.
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var add_row(const Var& a, const Var& row);  // broadcast 1xC over rows
Var mul_row(const Var& a, const Var& row);  // broadcast 1xC over rows
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var sqrt(const Var& a);

// Reductions.
Var sum(const Var& a);
Var mean(const Var& a);
/// Per-column variance over rows (unbiased); all zeros when rows == 1.
Var col_variance(const Var& a);

// Shape manipulation.
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var concat_cols(std::span<const Var> parts);
/// Rows b*steps + t for fixed t: (batch*steps x C) -> (batch x C).
Var time_step(const Var& a, Eigen::Index batch, Eigen::Index steps, Eigen::Index t);
/// Inverse of time_step over all t: steps of (batch x C) -> (batch*steps x C).
Var interleave_steps(std::span<const Var> steps);

// Sequence ops on (batch*length x C) layouts.
/// 'same'-padded unfold for 1-D convolution; column index = tap * C + channel.
Var im2col_1d(const Var& x, Eigen::Index batch, Eigen::Index length, Eigen::Index kernel);
/// Non-overlapping max pooling along time; trailing remainder dropped.
Var maxpool_time(const Var& x, Eigen::Index batch, Eigen::Index length, Eigen::Index width);
/// Mean over time: (batch*length x C) -> (batch x C).
Var mean_time(const Var& x, Eigen::Index batch, Eigen::Index length);

/// Batch normalisation with batch statistics over rows. Writes the batch
/// mean and biased variance into the optional outputs.
Var batch_norm_train(const Var& x, const Var& gamma, const Var& beta, double eps,
                     RowVector* batch_mean = nullptr, RowVector* batch_var = nullptr);

/// Row-wise l2 normalisation. Exactly-zero rows are mapped to the uniform
/// direction (guard epsilon added to every component) and counted.
Var l2_normalize_rows(const Var& a, std::size_t* zero_rows = nullptr);

/// Soft-boundary hinge over a column of scores:
///   Qau + 1/(rN) * sum_i max(0, s_i - Qau),
/// where Qau = sorted(s)[min(N-1, floor((1-r) N))].
Var soft_boundary(const Var& scores, double r);

}  // namespace roca::ag
