#pragma once

// Layers and the optimizer. Inputs follow the stacked-row layout of
// autograd.hpp: a batch of B sequences of length T is a (B*T x C) matrix.

#include "roca/autograd.hpp"
#include "roca/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace roca::nn {

using ag::Matrix;
using ag::RowVector;
using ag::Var;

struct NamedParameter {
    std::string name;
    Var var;
};

struct NamedBuffer {
    std::string name;
    RowVector* value;
};

/// Collects parameters and buffers under dotted module paths.
class Registry {
public:
    void add(std::string name, Var var) { params_.push_back({std::move(name), std::move(var)}); }
    void add_buffer(std::string name, RowVector* value) { buffers_.push_back({std::move(name), value}); }
    const std::vector<NamedParameter>& parameters() const { return params_; }
    const std::vector<NamedBuffer>& buffers() const { return buffers_; }
    void clear() {
        params_.clear();
        buffers_.clear();
    }

private:
    std::vector<NamedParameter> params_;
    std::vector<NamedBuffer> buffers_;
};

/// Uniform(-bound, bound) matrix.
Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng);

class Linear {
public:
    Linear() = default;
    Linear(Eigen::Index in, Eigen::Index out, bool bias, Rng& rng);
    Var forward(const Var& x) const;
    void register_into(Registry& reg, const std::string& prefix);

    Var weight;  // in x out
    Var bias;    // 1 x out, empty when disabled
};

/// 'same'-padded temporal convolution without bias.
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(Eigen::Index in_channels, Eigen::Index out_channels, Eigen::Index kernel, Rng& rng);
    Var forward(const Var& x, Eigen::Index batch, Eigen::Index length) const;
    void register_into(Registry& reg, const std::string& prefix);

    Eigen::Index kernel = 1;
    Var weight;  // (kernel*in) x out
};

class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(Eigen::Index features, double eps = 1e-5, double momentum = 0.1);
    /// Training mode normalizes with batch statistics and updates the
    /// running estimates; evaluation mode uses the running estimates.
    Var forward(const Var& x, bool training);
    void register_into(Registry& reg, const std::string& prefix);

    double eps = 1e-5;
    double momentum = 0.1;
    Var gamma;
    Var beta;
    RowVector running_mean;
    RowVector running_var;
};

/// Multi-layer LSTM; gate order i, f, g, o.
class Lstm {
public:
    struct State {
        std::vector<Var> h;
        std::vector<Var> c;
    };

    Lstm() = default;
    Lstm(Eigen::Index input, Eigen::Index hidden, int layers, Rng& rng);

    State zero_state(Eigen::Index batch) const;
    /// One time step through every layer; returns the top-layer output.
    Var step(const Var& x, State& state) const;
    void register_into(Registry& reg, const std::string& prefix);

    Eigen::Index hidden = 0;
    struct Layer {
        Var w_ih, w_hh, b_ih, b_hh;
    };
    std::vector<Layer> layers;
};

/// Adam with L2 weight decay folded into the gradient.
class Adam {
public:
    struct Options {
        double lr = 5e-4;
        double beta1 = 0.9;
        double beta2 = 0.99;
        double eps = 1e-8;
        double weight_decay = 0.0;
    };

    Adam(std::vector<Var> params, Options options);
    void step();
    void zero_grad();
    long steps() const { return t_; }

private:
    std::vector<Var> params_;
    std::vector<Matrix> m_, v_;
    Options opt_;
    long t_ = 0;
};

/// Inverted dropout mask: entries 0 or 1/(1-p).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng);

}  // namespace roca::nn
