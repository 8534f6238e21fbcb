#include "roca/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace roca::nn {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
    Matrix m(rows, cols);
    if (p <= 0.0) {
        m.setOnes();
        return m;
    }
    std::bernoulli_distribution keep(1.0 - p);
    const double s = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? s : 0.0;
    return m;
}

Linear::Linear(Eigen::Index in, Eigen::Index out, bool with_bias, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight = ag::parameter(uniform_matrix(in, out, bound, rng));
    if (with_bias) bias = ag::parameter(uniform_matrix(1, out, bound, rng));
}

Var Linear::forward(const Var& x) const {
    Var y = ag::matmul(x, weight);
    return bias ? ag::add_row(y, bias) : y;
}

void Linear::register_into(Registry& reg, const std::string& prefix) {
    reg.add(prefix + ".weight", weight);
    if (bias) reg.add(prefix + ".bias", bias);
}

Conv1d::Conv1d(Eigen::Index in_channels, Eigen::Index out_channels, Eigen::Index k, Rng& rng) : kernel(k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * k));
    weight = ag::parameter(uniform_matrix(k * in_channels, out_channels, bound, rng));
}

Var Conv1d::forward(const Var& x, Eigen::Index batch, Eigen::Index length) const {
    return ag::matmul(ag::im2col_1d(x, batch, length, kernel), weight);
}

void Conv1d::register_into(Registry& reg, const std::string& prefix) { reg.add(prefix + ".weight", weight); }

BatchNorm::BatchNorm(Eigen::Index features, double e, double m)
    : eps(e),
      momentum(m),
      gamma(ag::parameter(Matrix::Ones(1, features))),
      beta(ag::parameter(Matrix::Zero(1, features))),
      running_mean(RowVector::Zero(features)),
      running_var(RowVector::Ones(features)) {}

Var BatchNorm::forward(const Var& x, bool training) {
    if (training) {
        RowVector mu, var;
        Var y = ag::batch_norm_train(x, gamma, beta, eps, &mu, &var);
        const auto n = static_cast<double>(x.rows());
        running_mean = (1.0 - momentum) * running_mean + momentum * mu;
        if (x.rows() > 1) running_var = (1.0 - momentum) * running_var + momentum * (var * (n / (n - 1.0)));
        return y;
    }
    const RowVector inv_std = (running_var.array() + eps).rsqrt();
    Var xhat = ag::mul_row(ag::add_row(x, ag::constant(-running_mean)), ag::constant(inv_std));
    return ag::add_row(ag::mul_row(xhat, gamma), beta);
}

void BatchNorm::register_into(Registry& reg, const std::string& prefix) {
    reg.add(prefix + ".weight", gamma);
    reg.add(prefix + ".bias", beta);
    reg.add_buffer(prefix + ".running_mean", &running_mean);
    reg.add_buffer(prefix + ".running_var", &running_var);
}

Lstm::Lstm(Eigen::Index input, Eigen::Index h, int n_layers, Rng& rng) : hidden(h) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    for (int l = 0; l < n_layers; ++l) {
        const Eigen::Index in = l == 0 ? input : h;
        layers.push_back({ag::parameter(uniform_matrix(in, 4 * h, bound, rng)),
                          ag::parameter(uniform_matrix(h, 4 * h, bound, rng)),
                          ag::parameter(uniform_matrix(1, 4 * h, bound, rng)),
                          ag::parameter(uniform_matrix(1, 4 * h, bound, rng))});
    }
}

Lstm::State Lstm::zero_state(Eigen::Index batch) const {
    State s;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        s.h.push_back(ag::constant(Matrix::Zero(batch, hidden)));
        s.c.push_back(ag::constant(Matrix::Zero(batch, hidden)));
    }
    return s;
}

Var Lstm::step(const Var& x, State& state) const {
    Var input = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& p = layers[l];
        Var gates = ag::add(ag::add_row(ag::matmul(input, p.w_ih), p.b_ih),
                            ag::add_row(ag::matmul(state.h[l], p.w_hh), p.b_hh));
        Var i = ag::sigmoid(ag::slice_cols(gates, 0, hidden));
        Var f = ag::sigmoid(ag::slice_cols(gates, hidden, hidden));
        Var g = ag::tanh(ag::slice_cols(gates, 2 * hidden, hidden));
        Var o = ag::sigmoid(ag::slice_cols(gates, 3 * hidden, hidden));
        state.c[l] = ag::add(ag::mul(f, state.c[l]), ag::mul(i, g));
        state.h[l] = ag::mul(o, ag::tanh(state.c[l]));
        input = state.h[l];
    }
    return input;
}

void Lstm::register_into(Registry& reg, const std::string& prefix) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = prefix + ".layer" + std::to_string(l);
        reg.add(p + ".weight_ih", layers[l].w_ih);
        reg.add(p + ".weight_hh", layers[l].w_hh);
        reg.add(p + ".bias_ih", layers[l].b_ih);
        reg.add(p + ".bias_hh", layers[l].b_hh);
    }
}

Adam::Adam(std::vector<Var> params, Options options) : params_(std::move(params)), opt_(options) {
    for (const auto& p : params_) {
        m_.push_back(Matrix::Zero(p.rows(), p.cols()));
        v_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Var& p = params_[k];
        if (!p.has_grad()) continue;
        Matrix g = p.grad();
        if (opt_.weight_decay != 0.0) g += opt_.weight_decay * p.value();
        m_[k] = opt_.beta1 * m_[k] + (1.0 - opt_.beta1) * g;
        v_[k] = opt_.beta2 * v_[k] + (1.0 - opt_.beta2) * g.cwiseProduct(g);
        const Matrix denom = (v_[k].array().sqrt() / std::sqrt(bc2)) + opt_.eps;
        p.mutable_value().array() -= (opt_.lr / bc1) * m_[k].array() / denom.array();
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace roca::nn
