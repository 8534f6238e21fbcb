#pragma once

// The pipeline f (temporal conv encoder) -> g/h (LSTM seq2seq) -> p
// (projector) and the one-class center.

#include "roca/config.hpp"
#include "roca/data.hpp"
#include "roca/nn.hpp"

#include <cstddef>
#include <optional>

namespace roca {

using ag::Matrix;
using ag::RowVector;
using ag::Var;

struct EncoderSpec {
    int input_dim = 1;
    int window_length = 16;
    int blocks = 2;
    int channels = 32;
    int kernel = 3;
    int pool = 2;
    double dropout = 0.45;
    int lstm_layers = 3;
    int projector_hidden = 64;
    int projection_dim = 16;
    TemporalReduction reduction = TemporalReduction::Flatten;

    static EncoderSpec from_config(const ExperimentConfig& config);
    /// Temporal length L' after the pooling stack.
    int latent_length() const;
    int projector_input() const;
    /// Throws ConfigError when the shape chain is empty or inconsistent.
    void validate() const;
    bool operator==(const EncoderSpec&) const = default;
};

class RocaModel {
public:
    struct Output {
        Var z;       // (B*L') x K
        Var z_rec;   // (B*L') x K
        Var raw_q;   // B x P, before normalization
        Var raw_qp;
        Var q;       // B x P, unit rows
        Var qp;
        std::size_t zero_rows = 0;
    };

    RocaModel(const EncoderSpec& spec, Rng& init_rng);
    RocaModel(const RocaModel&) = delete;
    RocaModel& operator=(const RocaModel&) = delete;
    RocaModel(RocaModel&& other) noexcept;
    RocaModel& operator=(RocaModel&& other) noexcept;

    /// x is the stacked batch (B*L x dim). In training mode dropout masks
    /// are drawn from `dropout_rng` and normalization layers update their
    /// running statistics.
    Output forward(const Matrix& x, Eigen::Index batch, bool training, Rng* dropout_rng = nullptr);

    Var encode(const Var& x, Eigen::Index batch, bool training, Rng* dropout_rng = nullptr);
    Var reconstruct(const Var& z, Eigen::Index batch);
    /// Returns unit rows; writes the pre-normalization rows to `raw`.
    Var project(const Var& z, Eigen::Index batch, bool training, Var* raw = nullptr, std::size_t* zero_rows = nullptr);

    const EncoderSpec& spec() const { return spec_; }
    const nn::Registry& registry() const { return registry_; }
    std::vector<Var> parameters() const;
    std::size_t parameter_count() const;

    const std::optional<RowVector>& center() const { return center_; }
    void set_center(RowVector c) { center_ = std::move(c); }
    void clear_center() { center_.reset(); }

    /// Total zero-vector guard incidents seen by project().
    std::size_t zero_vector_incidents() const { return zero_incidents_; }

private:
    void rebuild_registry();

    EncoderSpec spec_;
    std::vector<nn::Conv1d> convs_;
    std::vector<nn::BatchNorm> conv_bns_;
    nn::Lstm seq_encoder_;
    nn::Lstm seq_decoder_;
    nn::Linear decoder_out_;
    nn::Linear proj_hidden_;
    nn::BatchNorm proj_bn_;
    nn::Linear proj_out_;
    nn::Registry registry_;
    std::optional<RowVector> center_;
    std::size_t zero_incidents_ = 0;
};

struct Projections {
    Matrix q;   // N x P
    Matrix qp;  // N x P
};

/// Evaluation-mode projections of every window, computed in chunks.
Projections project_dataset(RocaModel& model, const WindowedDataset& ds, std::size_t chunk = 512);

/// l2-normalized mean of all rows of q and q', with every component kept
/// at least eps away from zero.
RowVector compute_center(const Matrix& q, const Matrix& qp, double eps = 1e-4);

}  // namespace roca
