#pragma once

// Segment-aware evaluation over point-level binary streams.
//
//   PW    plain point-wise precision / recall / F1
//   PA    a truth segment with any detected point counts as fully detected
//   PA%K  as PA, but only when more than K% of the segment is detected
//         (K = 0 is PA, K = 100 is PW)
//   RPA   each truth segment is one unit (TP if hit, FN otherwise); each
//         maximal predicted segment touching no truth segment is one FP

#include "roca/config.hpp"
#include "roca/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace roca {

using Labels = std::vector<std::uint8_t>;

struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
    bool operator==(const Segment&) const = default;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// F1 = 2PR/(P+R), zero denominators give 0.
Prf prf_from_counts(double tp, double fp, double fn);

std::vector<Segment> segments(const Labels& truth);

Prf pw_scores(const Labels& truth, const Labels& pred);
Labels pa_adjust(const Labels& truth, const Labels& pred);
Prf pa_scores(const Labels& truth, const Labels& pred);
Labels pak_adjust(const Labels& truth, const Labels& pred, double k_percent);
Prf pak_scores(const Labels& truth, const Labels& pred, double k_percent);

struct RpaCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};
RpaCounts rpa_counts(const Labels& truth, const Labels& pred);
Prf rpa_scores(const Labels& truth, const Labels& pred);

Prf score_metric(MetricKind kind, const Labels& truth, const Labels& pred, double pak_k = 20.0);
std::string metric_label(MetricKind kind, double pak_k = 20.0);

/// One subset's results under every built-in metric.
struct EvalOutcome {
    std::string subset;
    std::size_t segment_count = 0;  // e_i
    Prf pw, pa, pak, rpa;

    const Prf& get(MetricKind kind) const;
};

EvalOutcome evaluate_stream(const std::string& subset, const Labels& truth, const Labels& pred, double pak_k = 20.0);

struct WeightedF1 {
    std::size_t segments = 0;
    double f1 = 0.0;
};

/// Sum of (e_i / E) F1_i. Throws std::invalid_argument when E = 0.
double aggregate(const std::vector<WeightedF1>& parts);

/// i.i.d. uniform [0, 1) scores.
std::vector<double> ras_baseline(std::size_t length, Rng& rng);

// Plug-in slot for externally defined metrics (e.g. affiliation).
using MetricPlugin = std::function<Prf(const Labels& truth, const Labels& pred)>;
void register_metric(const std::string& name, MetricPlugin fn);
std::optional<MetricPlugin> find_metric(const std::string& name);
std::vector<std::string> registered_metrics();

}  // namespace roca
