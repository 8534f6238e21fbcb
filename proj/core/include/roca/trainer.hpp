#pragma once

// Alternating optimization: per mini-batch the latent labels are estimated
// from the current (pre-update) scores, then the parameters take one
// optimizer step on the variant's loss.

#include "roca/config.hpp"
#include "roca/data.hpp"
#include "roca/losses.hpp"
#include "roca/model.hpp"
#include "roca/nn.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roca {

/// Raised when a batch produces a non-finite loss.
class TrainingAborted : public std::runtime_error {
public:
    TrainingAborted(const std::string& what, int epoch, int batch)
        : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

private:
    int epoch_;
    int batch_;
};

/// Top round(nu * N) entries of s set to 1; ties go to the lower index.
std::vector<std::uint8_t> estimate_labels(const ColVector& s_train, double nu);

struct BatchLog {
    int epoch = 0;
    int batch = 0;
    std::size_t batch_size = 0;
    double total = 0.0;
    double l_joint = 0.0;
    double mean_l_inv = 0.0;
    double l_var_q = 0.0;
    double l_var_qp = 0.0;
    std::size_t label_count = 0;
    std::size_t zero_vectors = 0;
    RowVector center;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double mean_l_inv = 0.0;
    double sim_q_ce = 0.0;
    double sim_qp_ce = 0.0;
    double sim_q_qp = 0.0;
    /// Fraction of samples with l_inv >= 1 + l_sim (the tightness diagnostic).
    double bound_tightness = 0.0;
    std::optional<double> validation_l_inv;
};

struct TrainState {
    int epoch = 0;  // completed epochs
    std::optional<RowVector> center;
    bool center_frozen = false;
    std::vector<EpochStats> history;
    std::vector<BatchLog> batch_log;
    /// Per epoch, the dataset indices that received y = 1.
    std::vector<std::vector<std::size_t>> label_log;
    std::optional<int> early_stop_epoch;
    std::optional<int> best_epoch;

    std::unique_ptr<nn::Adam> optimizer;
    Rng shuffle_rng;
};

TrainState make_train_state(RocaModel& model, const ExperimentConfig& config);

/// One pass over shuffled mini-batches.
void train_epoch(RocaModel& model, const WindowedDataset& ds, const ExperimentConfig& config, TrainState& state);

/// Runs config.train.epochs epochs (fewer with early stopping) and leaves the
/// frozen center on the model. `validation` feeds early stopping.
TrainState fit(RocaModel& model, const WindowedDataset& train, const ExperimentConfig& config,
               const WindowedDataset* validation = nullptr);

/// Mean l_inv over a dataset in evaluation mode with the given center.
double mean_invariance(RocaModel& model, const WindowedDataset& ds, const RowVector& center);

void write_batch_log(std::ostream& out, const TrainState& state);
void write_label_log(std::ostream& out, const TrainState& state);

}  // namespace roca
