#include "roca/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roca {

EncoderSpec EncoderSpec::from_config(const ExperimentConfig& config) {
    EncoderSpec s;
    s.input_dim = config.series.dim;
    s.window_length = config.series.window_length;
    s.blocks = config.model.encoder_blocks;
    s.channels = config.model.channels;
    s.kernel = config.model.kernel_size;
    s.pool = config.model.pool_width;
    s.dropout = config.train.dropout;
    s.lstm_layers = config.model.lstm_layers;
    s.projector_hidden = config.model.projector_hidden;
    s.projection_dim = config.model.projection_dim;
    s.reduction = config.model.reduction;
    return s;
}

int EncoderSpec::latent_length() const {
    int len = window_length;
    for (int b = 0; b < blocks; ++b) len /= pool;
    return len;
}

int EncoderSpec::projector_input() const {
    return reduction == TemporalReduction::Flatten ? latent_length() * channels : channels;
}

void EncoderSpec::validate() const {
    if (input_dim < 1) throw ConfigError("dim", "must be >= 1");
    if (blocks < 1) throw ConfigError("encoder_blocks", "must be >= 1");
    if (channels < 1 || kernel < 1 || pool < 1) throw ConfigError("channels", "encoder widths must be positive");
    if (latent_length() < 1) {
        throw ConfigError("window_length", "window of " + std::to_string(window_length) + " is too short for " +
                                               std::to_string(blocks) + " pooling blocks of width " +
                                               std::to_string(pool));
    }
    if (lstm_layers < 1) throw ConfigError("lstm_layers", "must be >= 1");
    if (projector_hidden < 1 || projection_dim < 1) throw ConfigError("projection_dim", "must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout", "must lie in [0, 1)");
}

RocaModel::RocaModel(const EncoderSpec& spec, Rng& rng) : spec_(spec) {
    spec_.validate();
    const Eigen::Index K = spec_.channels;
    for (int b = 0; b < spec_.blocks; ++b) {
        convs_.emplace_back(b == 0 ? spec_.input_dim : K, K, spec_.kernel, rng);
        conv_bns_.emplace_back(K);
    }
    seq_encoder_ = nn::Lstm(K, K, spec_.lstm_layers, rng);
    seq_decoder_ = nn::Lstm(K, K, spec_.lstm_layers, rng);
    decoder_out_ = nn::Linear(K, K, true, rng);
    proj_hidden_ = nn::Linear(spec_.projector_input(), spec_.projector_hidden, true, rng);
    proj_bn_ = nn::BatchNorm(spec_.projector_hidden);
    proj_out_ = nn::Linear(spec_.projector_hidden, spec_.projection_dim, true, rng);
    rebuild_registry();
}

RocaModel::RocaModel(RocaModel&& other) noexcept { *this = std::move(other); }

RocaModel& RocaModel::operator=(RocaModel&& other) noexcept {
    spec_ = other.spec_;
    convs_ = std::move(other.convs_);
    conv_bns_ = std::move(other.conv_bns_);
    seq_encoder_ = std::move(other.seq_encoder_);
    seq_decoder_ = std::move(other.seq_decoder_);
    decoder_out_ = std::move(other.decoder_out_);
    proj_hidden_ = std::move(other.proj_hidden_);
    proj_bn_ = std::move(other.proj_bn_);
    proj_out_ = std::move(other.proj_out_);
    center_ = std::move(other.center_);
    zero_incidents_ = other.zero_incidents_;
    rebuild_registry();
    other.registry_.clear();
    return *this;
}

void RocaModel::rebuild_registry() {
    registry_.clear();
    for (std::size_t b = 0; b < convs_.size(); ++b) {
        const std::string p = "encoder.block" + std::to_string(b);
        convs_[b].register_into(registry_, p + ".conv");
        conv_bns_[b].register_into(registry_, p + ".bn");
    }
    seq_encoder_.register_into(registry_, "seq2seq.encoder");
    seq_decoder_.register_into(registry_, "seq2seq.decoder");
    decoder_out_.register_into(registry_, "seq2seq.fc");
    proj_hidden_.register_into(registry_, "projector.hidden");
    proj_bn_.register_into(registry_, "projector.bn");
    proj_out_.register_into(registry_, "projector.out");
}

std::vector<Var> RocaModel::parameters() const {
    std::vector<Var> out;
    for (const auto& p : registry_.parameters()) out.push_back(p.var);
    return out;
}

std::size_t RocaModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : registry_.parameters()) n += static_cast<std::size_t>(p.var.value().size());
    return n;
}

Var RocaModel::encode(const Var& x, Eigen::Index batch, bool training, Rng* dropout_rng) {
    if (x.rows() != batch * spec_.window_length || x.cols() != spec_.input_dim) {
        throw std::invalid_argument("encode: input shape does not match the encoder spec");
    }
    Var h = x;
    Eigen::Index length = spec_.window_length;
    for (std::size_t b = 0; b < convs_.size(); ++b) {
        h = convs_[b].forward(h, batch, length);
        h = conv_bns_[b].forward(h, training);
        h = ag::relu(h);
        h = ag::maxpool_time(h, batch, length, spec_.pool);
        length /= spec_.pool;
        if (b == 0 && training && spec_.dropout > 0.0) {
            if (!dropout_rng) throw std::invalid_argument("encode: training with dropout needs an rng");
            h = ag::mul(h, ag::constant(nn::dropout_mask(h.rows(), h.cols(), spec_.dropout, *dropout_rng)));
        }
    }
    return h;
}

Var RocaModel::reconstruct(const Var& z, Eigen::Index batch) {
    const Eigen::Index steps = spec_.latent_length();
    const Eigen::Index K = spec_.channels;
    if (z.rows() != batch * steps || z.cols() != K) throw std::invalid_argument("reconstruct: shape mismatch");
    nn::Lstm::State state = seq_encoder_.zero_state(batch);
    for (Eigen::Index t = 0; t < steps; ++t) seq_encoder_.step(ag::time_step(z, batch, steps, t), state);

    std::vector<Var> outputs;
    outputs.reserve(static_cast<std::size_t>(steps));
    Var input = ag::constant(Matrix::Zero(batch, K));
    for (Eigen::Index t = 0; t < steps; ++t) {
        Var h = seq_decoder_.step(input, state);
        Var out = decoder_out_.forward(h);
        outputs.push_back(out);
        input = out;
    }
    return ag::interleave_steps(outputs);
}

Var RocaModel::project(const Var& z, Eigen::Index batch, bool training, Var* raw, std::size_t* zero_rows) {
    const Eigen::Index steps = spec_.latent_length();
    Var flat = spec_.reduction == TemporalReduction::Flatten ? ag::reshape(z, batch, steps * z.cols())
                                                              : ag::mean_time(z, batch, steps);
    Var h = ag::relu(proj_bn_.forward(proj_hidden_.forward(flat), training));
    Var r = proj_out_.forward(h);
    if (raw) *raw = r;
    std::size_t zeros = 0;
    Var q = ag::l2_normalize_rows(r, &zeros);
    zero_incidents_ += zeros;
    if (zero_rows) *zero_rows += zeros;
    return q;
}

RocaModel::Output RocaModel::forward(const Matrix& x, Eigen::Index batch, bool training, Rng* dropout_rng) {
    Output out;
    out.z = encode(ag::constant(x), batch, training, dropout_rng);
    out.z_rec = reconstruct(out.z, batch);
    out.q = project(out.z, batch, training, &out.raw_q, &out.zero_rows);
    out.qp = project(out.z_rec, batch, training, &out.raw_qp, &out.zero_rows);
    return out;
}

Projections project_dataset(RocaModel& model, const WindowedDataset& ds, std::size_t chunk) {
    const auto P = model.spec().projection_dim;
    Projections out{Matrix(static_cast<Eigen::Index>(ds.size()), P), Matrix(static_cast<Eigen::Index>(ds.size()), P)};
    for (std::size_t first = 0; first < ds.size(); first += chunk) {
        const std::size_t count = std::min(chunk, ds.size() - first);
        auto fwd = model.forward(ds.slice(first, count), static_cast<Eigen::Index>(count), false);
        out.q.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = fwd.q.value();
        out.qp.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = fwd.qp.value();
    }
    return out;
}

RowVector compute_center(const Matrix& q, const Matrix& qp, double eps) {
    if (q.rows() + qp.rows() < 1) throw std::invalid_argument("compute_center: empty batch");
    if (q.cols() != qp.cols()) throw std::invalid_argument("compute_center: width mismatch");
    RowVector c = (q.colwise().sum() + qp.colwise().sum()) / static_cast<double>(q.rows() + qp.rows());
    double norm = c.norm();
    if (norm == 0.0) {
        c.array() += eps;
        norm = c.norm();
    }
    c /= norm;
    bool adjusted = false;
    for (Eigen::Index d = 0; d < c.size(); ++d) {
        if (std::abs(c(d)) < eps) {
            c(d) = c(d) < 0.0 ? -eps : eps;
            adjusted = true;
        }
    }
    if (adjusted) c /= c.norm();
    return c;
}

}  // namespace roca
