#include "roca/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace roca {

namespace {

bool uses_labels(const VariantId& v) { return v.kind == Variant::Roca || v.kind == Variant::RocaNoV; }

RowVector full_set_center(RocaModel& model, const WindowedDataset& ds, double eps) {
    const Projections p = project_dataset(model, ds);
    return compute_center(p.q, p.qp, eps);
}

struct Snapshot {
    std::vector<Matrix> params;
    std::vector<RowVector> buffers;
};

Snapshot take_snapshot(const RocaModel& model) {
    Snapshot s;
    for (const auto& p : model.registry().parameters()) s.params.push_back(p.var.value());
    for (const auto& b : model.registry().buffers()) s.buffers.push_back(*b.value);
    return s;
}

void restore_snapshot(RocaModel& model, const Snapshot& s) {
    const auto& params = model.registry().parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Var v = params[i].var;
        v.mutable_value() = s.params[i];
    }
    const auto& buffers = model.registry().buffers();
    for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i].value = s.buffers[i];
}

}  // namespace

std::vector<std::uint8_t> estimate_labels(const ColVector& s_train, double nu) {
    if (!(nu >= 0.0 && nu < 1.0)) throw std::invalid_argument("nu must lie in [0, 1)");
    const auto n = static_cast<std::size_t>(s_train.size());
    const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(round_count(nu * static_cast<double>(n))));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s_train(static_cast<Eigen::Index>(a)) > s_train(static_cast<Eigen::Index>(b));
    });
    std::vector<std::uint8_t> y(n, 0);
    for (std::size_t i = 0; i < k; ++i) y[order[i]] = 1;
    return y;
}

TrainState make_train_state(RocaModel& model, const ExperimentConfig& config) {
    TrainState state;
    nn::Adam::Options opt;
    opt.lr = config.train.learning_rate;
    opt.beta1 = config.train.beta1;
    opt.beta2 = config.train.beta2;
    opt.weight_decay = config.train.weight_decay;
    state.optimizer = std::make_unique<nn::Adam>(model.parameters(), opt);
    state.shuffle_rng = make_rng(config.train.seed, Stream::Shuffle);
    return state;
}

void train_epoch(RocaModel& model, const WindowedDataset& ds, const ExperimentConfig& config, TrainState& state) {
    const TrainConfig& tc = config.train;
    const int epoch = state.epoch;
    const std::size_t n = ds.size();
    if (n == 0) throw DataError("training set is empty");
    if (ds.window_length != config.series.window_length || ds.dim != config.series.dim) {
        throw DataError("training windows do not match the configured series shape");
    }

    if (!state.center_frozen && epoch >= tc.effective_center_freeze()) {
        if (!state.center) state.center = full_set_center(model, ds, tc.epsilon);
        state.center_frozen = true;
    }
    if (!state.center_frozen && tc.center_scope == Scope::FullSet) {
        state.center = full_set_center(model, ds, tc.epsilon);
    }

    const bool label_epoch = uses_labels(config.variant) && epoch >= tc.warmup_epochs;
    std::vector<std::uint8_t> full_labels;
    if (label_epoch && tc.label_scope == Scope::FullSet) {
        if (!state.center) state.center = full_set_center(model, ds, tc.epsilon);
        const Projections p = project_dataset(model, ds);
        full_labels = estimate_labels(training_scores(invariance_values(p.q, p.qp, *state.center)), tc.nu);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), state.shuffle_rng);

    const auto bs = static_cast<std::size_t>(tc.batch_size);
    std::size_t batches = tc.drop_last ? n / bs : (n + bs - 1) / bs;
    if (batches == 0) batches = 1;  // fewer windows than one batch: train on all of them

    EpochStats stats;
    stats.epoch = epoch;
    std::vector<std::size_t> flagged;
    std::size_t samples = 0;
    double loss_sum = 0.0;

    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t first = b * bs;
        const std::size_t count = std::min(bs, n - first);
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(first),
                                     order.begin() + static_cast<std::ptrdiff_t>(first + count));
        const auto B = static_cast<Eigen::Index>(count);
        auto fwd = model.forward(ds.gather(idx), B, true, &state.shuffle_rng);

        if (!state.center_frozen && tc.center_scope == Scope::Batch) {
            state.center = compute_center(fwd.q.value(), fwd.qp.value(), tc.epsilon);
        }
        if (!fwd.q.value().allFinite() || !fwd.qp.value().allFinite()) {
            std::ostringstream msg;
            msg << "non-finite projections at epoch " << epoch << " batch " << b << ": zero_vectors=" << fwd.zero_rows;
            throw TrainingAborted(msg.str(), epoch, static_cast<int>(b));
        }
        if (!state.center->allFinite()) throw TrainingAborted("non-finite center", epoch, static_cast<int>(b));
        const RowVector& center = *state.center;

        LossInputs in{fwd.q, fwd.qp, fwd.raw_q, fwd.raw_qp, center, {}};
        if (label_epoch) {
            if (tc.label_scope == Scope::Batch) {
                if (tc.eval_mode_labels) {
                    const auto probe = model.forward(ds.gather(idx), B, false);
                    in.labels = estimate_labels(
                        training_scores(invariance_values(probe.q.value(), probe.qp.value(), center)), tc.nu);
                } else {
                    in.labels = estimate_labels(
                        training_scores(invariance_values(fwd.q.value(), fwd.qp.value(), center)), tc.nu);
                }
            } else {
                in.labels.resize(count);
                for (std::size_t i = 0; i < count; ++i) in.labels[i] = full_labels[idx[i]];
            }
        }

        LossResult res = total_loss(config.variant, in, tc);
        const LossReport& r = res.report;
        if (!std::isfinite(r.total)) {
            std::ostringstream msg;
            msg << "non-finite loss at epoch " << epoch << " batch " << b << ": total=" << r.total
                << " joint=" << r.l_joint << " mean_l_inv=" << r.l_inv.mean() << " var_q=" << r.l_var_q
                << " var_q'=" << r.l_var_qp << " zero_vectors=" << fwd.zero_rows;
            throw TrainingAborted(msg.str(), epoch, static_cast<int>(b));
        }
        ag::backward(res.total);
        state.optimizer->step();
        state.optimizer->zero_grad();

        BatchLog log;
        log.epoch = epoch;
        log.batch = static_cast<int>(b);
        log.batch_size = count;
        log.total = r.total;
        log.l_joint = r.l_joint;
        log.mean_l_inv = r.l_inv.mean();
        log.l_var_q = r.l_var_q;
        log.l_var_qp = r.l_var_qp;
        log.label_count = static_cast<std::size_t>(std::count(r.labels_used.begin(), r.labels_used.end(), 1));
        log.zero_vectors = fwd.zero_rows;
        log.center = center;
        state.batch_log.push_back(std::move(log));

        for (std::size_t i = 0; i < count; ++i) {
            if (r.labels_used[i]) flagged.push_back(idx[i]);
        }
        const Matrix& q = fwd.q.value();
        const Matrix& qp = fwd.qp.value();
        const ColVector sim_q = q * center.transpose();
        const ColVector sim_qp = qp * center.transpose();
        const ColVector sim_pair = q.cwiseProduct(qp).rowwise().sum();
        stats.sim_q_ce += sim_q.sum();
        stats.sim_qp_ce += sim_qp.sum();
        stats.sim_q_qp += sim_pair.sum();
        stats.mean_l_inv += r.l_inv.sum();
        stats.bound_tightness += static_cast<double>(
            (r.l_inv.array() >= (1.0 - sim_pair.array())).count());
        loss_sum += r.total * static_cast<double>(count);
        samples += count;
    }

    const auto denom = static_cast<double>(samples);
    stats.mean_loss = loss_sum / denom;
    stats.mean_l_inv /= denom;
    stats.sim_q_ce /= denom;
    stats.sim_qp_ce /= denom;
    stats.sim_q_qp /= denom;
    stats.bound_tightness /= denom;
    std::sort(flagged.begin(), flagged.end());
    state.history.push_back(stats);
    state.label_log.push_back(std::move(flagged));
    ++state.epoch;
}

double mean_invariance(RocaModel& model, const WindowedDataset& ds, const RowVector& center) {
    const Projections p = project_dataset(model, ds);
    return invariance_values(p.q, p.qp, center).mean();
}

TrainState fit(RocaModel& model, const WindowedDataset& train, const ExperimentConfig& config,
               const WindowedDataset* validation) {
    config.validate();
    TrainState state = make_train_state(model, config);
    const TrainConfig& tc = config.train;
    const bool early = tc.early_stopping && validation && validation->size() > 0;

    std::optional<Snapshot> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int e = 0; e < tc.epochs; ++e) {
        train_epoch(model, train, config, state);
        if (!early || !state.center_frozen) continue;
        const double v = mean_invariance(model, *validation, *state.center);
        state.history.back().validation_l_inv = v;
        if (v < best_value) {
            best_value = v;
            state.best_epoch = e;
            best = take_snapshot(model);
        } else if (e - *state.best_epoch >= tc.patience) {
            state.early_stop_epoch = e;
            break;
        }
    }
    if (best) restore_snapshot(model, *best);

    if (!state.center) state.center = full_set_center(model, train, tc.epsilon);
    state.center_frozen = true;
    model.set_center(*state.center);
    return state;
}

void write_batch_log(std::ostream& out, const TrainState& state) {
    out << "epoch,batch,batch_size,total,l_joint,mean_l_inv,l_var_q,l_var_qp,label_count,zero_vectors\n";
    for (const auto& b : state.batch_log) {
        out << b.epoch << ',' << b.batch << ',' << b.batch_size << ',' << b.total << ',' << b.l_joint << ','
            << b.mean_l_inv << ',' << b.l_var_q << ',' << b.l_var_qp << ',' << b.label_count << ',' << b.zero_vectors
            << '\n';
    }
}

void write_label_log(std::ostream& out, const TrainState& state) {
    out << "epoch,flagged_count,flagged_indices\n";
    for (std::size_t e = 0; e < state.label_log.size(); ++e) {
        out << e << ',' << state.label_log[e].size() << ',';
        for (std::size_t i = 0; i < state.label_log[e].size(); ++i) out << (i ? " " : "") << state.label_log[e][i];
        out << '\n';
    }
}

}  // namespace roca
