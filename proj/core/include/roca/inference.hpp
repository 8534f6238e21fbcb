#pragma once

// Test-time scoring and thresholding. Scores are the invariance term
// against the frozen center; they are z-scored over the scored stream and
// compared with a threshold tau on the grid -3.00, -2.99, ..., 3.00.

#include "roca/config.hpp"
#include "roca/data.hpp"
#include "roca/metrics.hpp"
#include "roca/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace roca {

inline constexpr double kDefaultTau = 3.0;

/// Per-window l_inv in evaluation mode. Throws ContractError when the
/// model has no frozen center.
std::vector<double> score(RocaModel& model, const WindowedDataset& ds);

/// (x - mean) / std with the population std; a constant vector maps to
/// zeros and appends a warning.
std::vector<double> zscores(const std::vector<double>& raw, std::vector<std::string>* warnings = nullptr);

/// The 601 candidate thresholds, ascending.
const std::vector<double>& threshold_grid();

Labels apply_threshold(const std::vector<double>& z, double tau);

/// Exactly one flag at the argmax (earliest on ties).
Labels top1_rule(const std::vector<double>& raw);

/// A point is flagged iff some flagged window covers it.
Labels expand_to_points(const Labels& decisions, const std::vector<std::int64_t>& origin, std::int64_t window_length,
                        std::size_t length);

/// Labeled stream a threshold is tuned against.
struct ThresholdTarget {
    const std::vector<std::int64_t>* origin = nullptr;
    std::int64_t window_length = 0;
    const Labels* truth = nullptr;  // point labels
    MetricKind metric = MetricKind::PA;
    double pak_k = 20.0;
};

struct ThresholdChoice {
    double tau = kDefaultTau;
    double objective = 0.0;  // F1 reached on the target, 0 when defaulted
    bool defaulted = true;
    std::vector<std::string> warnings;
};

/// Without a target tau = 3. With one, the grid value maximizing the target
/// metric's F1 on the z-scored `raw` (ties: smallest tau).
ThresholdChoice select_threshold(const std::vector<double>& raw, const ThresholdTarget* target = nullptr);

struct ScoreSeries {
    std::vector<double> raw;
    std::vector<double> z;
    double tau = kDefaultTau;
    Labels decisions;
    Labels point_decisions;
};

/// Decisions for a scored stream at a fixed tau (or the top-1 rule).
ScoreSeries decide(std::vector<double> raw, double tau, bool top1, const std::vector<std::int64_t>& origin,
                   std::int64_t window_length, std::size_t length);

/// index,raw,zscore,decision rows.
void write_scores(std::ostream& out, const ScoreSeries& s);

}  // namespace roca
