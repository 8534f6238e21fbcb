#pragma once

// Columnar text tables: results rows, box-plot quantiles, line series and
// the mean±std summary layout.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace roca {

struct ResultRow {
    std::string dataset;
    std::string subset;
    std::string variant;
    std::string metric;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t segments = 0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    std::string threshold_mode;
    std::string manifest_hash;

    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultsHeader =
    "dataset,subset,variant,metric,precision,recall,f1,segments,tau,seed,threshold_mode,manifest_hash";

void write_results(std::ostream& out, const std::vector<ResultRow>& rows, bool header = true);
std::vector<ResultRow> read_results(std::istream& in);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // sample std; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

/// Percent with two decimals, e.g. 0.5014, 0.0508 -> "50.14±5.08".
std::string format_mean_std(const MeanStd& ms);

struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;  // whisker ends: extreme values within 1.5 IQR
    std::vector<double> outliers;
};

/// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(std::vector<double> values);

/// Aggregates rows over seeds: one summary line per (dataset, variant,
/// metric) with P, R, F1 as mean±std.
void write_summary(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace roca
