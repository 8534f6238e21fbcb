#pragma once

// Series ingestion, windowing, augmentation, contamination and the
// synthetic generator.

#include "roca/autograd.hpp"
#include "roca/config.hpp"
#include "roca/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace roca {

using Matrix = ag::Matrix;
using RowVector = ag::RowVector;

/// Input that cannot be turned into a dataset (bad layout, gaps, short series).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawSeries {
    Matrix values;                                 // T x dim
    std::optional<std::vector<std::uint8_t>> labels;  // T point labels

    Eigen::Index length() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
    void validate() const;
};

/// Windows are stored stacked: rows [i*L, (i+1)*L) of `data` hold window i.
struct WindowedDataset {
    Eigen::Index window_length = 0;
    Eigen::Index dim = 0;
    Matrix data;
    std::optional<std::vector<std::uint8_t>> labels;
    std::vector<std::int64_t> origin;
    /// 1 for windows mutated by inject_contamination; carried through augment.
    std::vector<std::uint8_t> injected;

    std::size_t size() const { return origin.size(); }
    auto window(std::size_t i) const { return data.middleRows(static_cast<Eigen::Index>(i) * window_length, window_length); }
    auto window(std::size_t i) { return data.middleRows(static_cast<Eigen::Index>(i) * window_length, window_length); }
    /// Copies the selected windows into a stacked (k*L x dim) matrix.
    Matrix gather(const std::vector<std::size_t>& indices) const;
    /// Windows [first, first + count) as a stacked matrix.
    Matrix slice(std::size_t first, std::size_t count) const;
};

struct Normalizer {
    RowVector mean;
    RowVector stddev;  // population std; 1 for constant dimensions
    std::vector<std::string> warnings;

    static Normalizer fit(const RawSeries& train);
    RawSeries apply(const RawSeries& series) const;
};

/// Normalizes with the series' own statistics (the train-split case).
RawSeries normalize(const RawSeries& series, std::vector<std::string>* warnings = nullptr);

WindowedDataset make_windows(const RawSeries& series, const SeriesSpec& spec);

/// [originals, jittered copies, scaled copies].
WindowedDataset augment(const WindowedDataset& ds, const AugmentationParams& params, Rng& rng);

enum class ContaminationBase { Windows, LabeledAnomalies };

struct ContaminationPlan {
    double pollution_rate = 0.0;
    std::vector<AnomalyKind> kinds{AnomalyKind::PointGlobal, AnomalyKind::PointLocal, AnomalyKind::PatternShapelet};
    ContaminationBase base = ContaminationBase::Windows;
    int pattern_length = 8;

    std::size_t count(const WindowedDataset& ds) const;
};

struct ContaminationResult {
    WindowedDataset dataset;
    std::vector<std::size_t> mask;  // sorted indices of injected windows
};

ContaminationResult inject_contamination(const WindowedDataset& ds, const ContaminationPlan& plan, Rng& rng);

struct SyntheticSeries {
    RawSeries train;
    RawSeries validation;
    RawSeries test;
};

/// Sum of sinusoids plus noise. Validation and test carry labeled anomaly
/// events; the training split is clean (contaminate it at window level).
SyntheticSeries generate_synthetic(const SyntheticSpec& spec, const SeriesSpec& series, std::uint64_t seed);

/// Writes one series as `timestamp,value_0,...,label` text with a header.
void write_series_csv(const std::filesystem::path& path, const RawSeries& series);

/// Reads the format above; a missing label column yields an unlabeled series.
/// Empty or NaN cells are rejected unless forward_fill is set.
RawSeries read_series_csv(const std::filesystem::path& path, bool forward_fill = false);

void write_index_list(const std::filesystem::path& path, const std::vector<std::size_t>& indices);
std::vector<std::size_t> read_index_list(const std::filesystem::path& path);

}  // namespace roca
