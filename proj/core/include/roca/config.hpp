#pragma once

// Shared domain types and experiment configuration.
//
// Configuration files are flat `key = value` text; `#` starts a comment.
// The optional `profile` key (aiops | ucr | swat | wadi | synthetic) selects
// the defaults every other key overrides. See docs/config.md for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roca {

/// Malformed configuration text (bad line, unknown key, unparsable value).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// A configuration that parsed but violates an invariant.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct SeriesSpec {
    std::string name = "synthetic";
    int dim = 1;
    int window_length = 16;
    int time_step = 16;

    void validate() const;
    bool operator==(const SeriesSpec&) const = default;
};

enum class Variant { Roca, Coca, Cocas, RocaNoV };

struct VariantId {
    Variant kind = Variant::Roca;
    std::optional<double> soft_boundary_r;  // present iff kind == Cocas

    static VariantId parse(std::string_view text);
    std::string name() const;
    void validate() const;
    bool operator==(const VariantId&) const = default;
};

enum class Scope { Batch, FullSet };
enum class TemporalReduction { Flatten, MeanPool };

struct TrainConfig {
    double nu = 0.05;
    double mu = 7.0;
    double lambda = 1.0;
    double zeta = 1.0;
    double epsilon = 1e-4;
    int warmup_epochs = 3;
    std::optional<int> center_freeze_epoch;  // unset: follows warmup_epochs
    int epochs = 50;
    int batch_size = 64;
    double learning_rate = 5e-4;
    double weight_decay = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double dropout = 0.45;
    std::uint64_t seed = 0;
    Scope label_scope = Scope::Batch;
    Scope center_scope = Scope::Batch;
    /// Rank latent labels from an evaluation-mode pass (no dropout, running
    /// BN statistics) of the pre-update parameters instead of the training pass.
    bool eval_mode_labels = true;
    bool drop_last = true;
    bool early_stopping = false;
    int patience = 10;
    double validation_fraction = 0.1;

    int effective_center_freeze() const { return center_freeze_epoch.value_or(warmup_epochs); }
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct ModelOptions {
    int encoder_blocks = 2;
    int channels = 32;
    int kernel_size = 3;
    int pool_width = 2;
    int lstm_layers = 3;
    int projector_hidden = 64;
    int projection_dim = 16;
    TemporalReduction reduction = TemporalReduction::Flatten;

    void validate() const;
    bool operator==(const ModelOptions&) const = default;
};

struct AugmentationParams {
    bool enabled = true;
    double jitter_sigma = 0.03;
    double scale_min = 0.9;
    double scale_max = 1.1;

    void validate() const;
    bool operator==(const AugmentationParams&) const = default;
};

enum class AnomalyKind { PointGlobal, PointLocal, PatternShapelet };

std::string to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(std::string_view text);

/// Parameters of the desk-scale synthetic benchmark: a sum of sinusoids
/// with Gaussian noise and injected anomaly events. The default periods
/// share no common multiple with each other or the stride, so windows do not
/// fall into a handful of exactly repeating phases.
struct SyntheticSpec {
    int train_length = 4000;
    int validation_length = 2000;
    int test_length = 8000;
    std::vector<double> periods{23.3, 7.7};
    std::vector<double> amplitudes{1.0, 0.4};
    double noise_sigma = 0.05;
    /// Anomaly events per slot of max(time_step, pattern_length) points in
    /// validation and test.
    double anomaly_rate = 0.02;
    std::vector<AnomalyKind> anomaly_kinds{AnomalyKind::PointGlobal, AnomalyKind::PointLocal,
                                           AnomalyKind::PatternShapelet};
    int pattern_length = 8;
    /// Pollution rate pr: fraction of training windows receiving an injected anomaly.
    double train_pollution_rate = 0.0;

    void validate() const;
    bool operator==(const SyntheticSpec&) const = default;
};

enum class ThresholdMode { Sigma3, Validation, Test };
enum class MetricKind { PW, PA, PAK, RPA };

struct EvalOptions {
    ThresholdMode threshold_mode = ThresholdMode::Sigma3;
    MetricKind threshold_metric = MetricKind::PA;
    double pak_k = 20.0;
    bool top1 = false;  // UCR rule: flag only the highest-scoring window

    bool operator==(const EvalOptions&) const = default;
};

std::string to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view text);
std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

struct ExperimentConfig {
    std::string profile = "synthetic";
    SeriesSpec series;
    TrainConfig train;
    VariantId variant;
    ModelOptions model;
    AugmentationParams augmentation;
    SyntheticSpec synthetic;
    EvalOptions eval;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for a named dataset profile. Throws ConfigError for unknown names.
ExperimentConfig profile_defaults(std::string_view profile);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Applies one `key = value` override (used for CLI flags and sweeps).
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Round half away from zero, as used for every count derived from a ratio.
long round_count(double x);

}  // namespace roca
