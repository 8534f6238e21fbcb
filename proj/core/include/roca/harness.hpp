#pragma once

// Experiment orchestration shared by the CLI and the acceptance suite:
// synthetic preparation, single trials, seed repetitions and sweeps.

#include "roca/benchmark_loader.hpp"
#include "roca/config.hpp"
#include "roca/data.hpp"
#include "roca/inference.hpp"
#include "roca/manifest.hpp"
#include "roca/metrics.hpp"
#include "roca/model.hpp"
#include "roca/table_io.hpp"
#include "roca/trainer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace roca {

/// Windows of a labeled evaluation stream plus its point labels.
struct EvalStream {
    WindowedDataset windows;
    Labels truth;  // point labels
    std::size_t length = 0;
};

EvalStream make_eval_stream(const RawSeries& normalized, const SeriesSpec& spec);

struct PreparedData {
    std::string dataset;
    std::string subset;
    Normalizer normalizer;
    WindowedDataset train;       // contaminated and augmented
    std::vector<std::size_t> contamination_mask;  // indices before augmentation
    std::optional<EvalStream> validation;
    EvalStream test;
    std::string fingerprint;
};

/// Generates, normalizes (train statistics), windows, contaminates and
/// augments the synthetic benchmark for config.train.seed.
PreparedData prepare_synthetic(const ExperimentConfig& config);

/// Same pipeline for a loaded benchmark subset; the last
/// validation_fraction of the training series becomes the validation stream.
PreparedData prepare_subset(const BenchmarkSubset& subset, const ExperimentConfig& config);

/// Pipeline for explicit splits (what `roca prepare` writes to disk). Without
/// a validation series this behaves like prepare_subset.
PreparedData prepare_splits(const std::string& dataset, const std::string& subset, const RawSeries& train,
                            const std::optional<RawSeries>& validation, const RawSeries& test,
                            const ExperimentConfig& config);

enum class Detector { Model, Ras };

struct TrialResult {
    std::string variant;  // variant name or "ras"
    std::uint64_t seed = 0;
    ThresholdChoice threshold;
    ScoreSeries test_scores;
    EvalOutcome outcome;
    std::string manifest_hash;
};

/// Thresholds raw scores per config.eval and evaluates every metric.
/// `validation_raw` is required in validation mode.
TrialResult evaluate_scores(const std::vector<double>& test_raw, const std::vector<double>* validation_raw,
                            const PreparedData& data, const ExperimentConfig& config);

/// RAS through the same threshold and metric path.
TrialResult run_ras(const PreparedData& data, const ExperimentConfig& config);

struct ModelTrial {
    TrialResult result;
    TrainState state;
    std::optional<RocaModel> model;
};

/// Trains a fresh model on `data` and evaluates it.
ModelTrial run_model_trial(const PreparedData& data, const ExperimentConfig& config);

/// Scores and evaluates an already trained model (center required).
TrialResult evaluate_model(RocaModel& model, const PreparedData& data, const ExperimentConfig& config);

/// prepare_synthetic + (model or RAS) trial in one call.
TrialResult run_synthetic_trial(const ExperimentConfig& config, Detector detector);

/// Result rows (one per metric) for a trial.
std::vector<ResultRow> result_rows(const TrialResult& trial, const PreparedData& data, const ExperimentConfig& config);

struct SweepSpec {
    std::string parameter;  // mu | nu | pr | lambda
    std::vector<double> values;
    int repetitions = 10;
    std::vector<std::string> variants{"roca"};
    MetricKind metric = MetricKind::RPA;
    ExperimentConfig base;

    void validate() const;
};

struct SweepCell {
    double value = 0.0;
    std::string variant;
    std::vector<double> f1;  // one per successful repetition
    std::vector<std::string> errors;
};

/// Sequential sweep; seeds 0..repetitions-1. A failing repetition is
/// recorded in the cell and the sweep continues.
std::vector<SweepCell> run_sweep(const SweepSpec& spec,
                                 const std::function<void(const SweepCell&, int rep)>& progress = {});

/// Applies a sweep parameter value to a configuration.
void apply_sweep_value(ExperimentConfig& config, const std::string& parameter, double value);

}  // namespace roca
