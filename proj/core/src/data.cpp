#include "roca/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace roca {

namespace {

RowVector column_std(const Matrix& m, const RowVector& mean) {
    RowVector sd(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double var = (m.col(c).array() - mean(c)).square().mean();
        sd(c) = std::sqrt(var);
    }
    return sd;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double random_sign(Rng& rng) { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; }

/// Replaces x[start, start+m) of one column by its circular shift by m/2,
/// rescaled about the segment mean.
template <typename Block>
void apply_shapelet(Block&& x, Eigen::Index col, Eigen::Index start, Eigen::Index m, double factor) {
    std::vector<double> seg(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) seg[static_cast<std::size_t>(i)] = x(start + i, col);
    const double mu = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(m);
    std::rotate(seg.begin(), seg.begin() + m / 2, seg.end());
    for (Eigen::Index i = 0; i < m; ++i) x(start + i, col) = mu + factor * (seg[static_cast<std::size_t>(i)] - mu);
}

double shapelet_factor(Rng& rng) { return uniform(rng, 1.5, 2.5); }
double spike_magnitude(Rng& rng) { return uniform(rng, 3.0, 6.0); }

}  // namespace

void RawSeries::validate() const {
    if (!values.allFinite()) throw DataError("series contains non-finite values");
    if (labels && labels->size() != static_cast<std::size_t>(values.rows())) {
        throw DataError("label count " + std::to_string(labels->size()) + " does not match series length " +
                        std::to_string(values.rows()));
    }
}

Matrix WindowedDataset::gather(const std::vector<std::size_t>& indices) const {
    Matrix out(static_cast<Eigen::Index>(indices.size()) * window_length, dim);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.middleRows(static_cast<Eigen::Index>(k) * window_length, window_length) = window(indices[k]);
    }
    return out;
}

Matrix WindowedDataset::slice(std::size_t first, std::size_t count) const {
    return data.middleRows(static_cast<Eigen::Index>(first) * window_length,
                           static_cast<Eigen::Index>(count) * window_length);
}

Normalizer Normalizer::fit(const RawSeries& train) {
    if (train.length() < 2) throw DataError("normalization needs at least 2 samples");
    if (!train.values.allFinite()) throw DataError("normalization input contains non-finite values");
    Normalizer n;
    n.mean = train.values.colwise().mean();
    n.stddev = column_std(train.values, n.mean);
    for (Eigen::Index c = 0; c < n.stddev.size(); ++c) {
        if (!(n.stddev(c) > 0.0)) {
            n.stddev(c) = 1.0;
            n.warnings.push_back("dimension " + std::to_string(c) + " is constant; centered but not scaled");
        }
    }
    return n;
}

RawSeries Normalizer::apply(const RawSeries& series) const {
    if (series.dim() != mean.size()) throw DataError("normalizer dimension mismatch");
    RawSeries out = series;
    out.values = ((series.values.rowwise() - mean).array().rowwise() / stddev.array()).matrix();
    return out;
}

RawSeries normalize(const RawSeries& series, std::vector<std::string>* warnings) {
    const Normalizer n = Normalizer::fit(series);
    if (warnings) warnings->insert(warnings->end(), n.warnings.begin(), n.warnings.end());
    return n.apply(series);
}

WindowedDataset make_windows(const RawSeries& series, const SeriesSpec& spec) {
    spec.validate();
    series.validate();
    const Eigen::Index T = series.length();
    const Eigen::Index L = spec.window_length;
    if (T < L) {
        throw DataError("series shorter than window (" + std::to_string(T) + " < " + std::to_string(L) + ")");
    }
    const Eigen::Index n = (T - L) / spec.time_step + 1;
    WindowedDataset ds;
    ds.window_length = L;
    ds.dim = series.dim();
    ds.data.resize(n * L, ds.dim);
    ds.origin.resize(static_cast<std::size_t>(n));
    ds.injected.assign(static_cast<std::size_t>(n), 0);
    if (series.labels) ds.labels.emplace(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index start = i * spec.time_step;
        ds.origin[static_cast<std::size_t>(i)] = start;
        ds.data.middleRows(i * L, L) = series.values.middleRows(start, L);
        if (series.labels) {
            const auto& pl = *series.labels;
            const bool any = std::any_of(pl.begin() + start, pl.begin() + start + L, [](auto v) { return v != 0; });
            (*ds.labels)[static_cast<std::size_t>(i)] = any ? 1 : 0;
        }
    }
    return ds;
}

WindowedDataset augment(const WindowedDataset& ds, const AugmentationParams& params, Rng& rng) {
    params.validate();
    const std::size_t n = ds.size();
    const Eigen::Index rows = ds.data.rows();
    WindowedDataset out;
    out.window_length = ds.window_length;
    out.dim = ds.dim;
    out.data.resize(3 * rows, ds.dim);
    out.data.topRows(rows) = ds.data;

    Matrix jittered = ds.data;
    if (params.jitter_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, params.jitter_sigma);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < ds.dim; ++c) jittered(r, c) += noise(rng);
        }
    }
    out.data.middleRows(rows, rows) = jittered;

    Matrix scaled = ds.data;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = params.scale_min == params.scale_max ? params.scale_min
                                                              : uniform(rng, params.scale_min, params.scale_max);
        scaled.middleRows(static_cast<Eigen::Index>(i) * ds.window_length, ds.window_length) *= s;
    }
    out.data.bottomRows(rows) = scaled;

    for (int copy = 0; copy < 3; ++copy) {
        out.origin.insert(out.origin.end(), ds.origin.begin(), ds.origin.end());
        out.injected.insert(out.injected.end(), ds.injected.begin(), ds.injected.end());
    }
    if (ds.labels) {
        out.labels.emplace();
        for (int copy = 0; copy < 3; ++copy) out.labels->insert(out.labels->end(), ds.labels->begin(), ds.labels->end());
    }
    return out;
}

std::size_t ContaminationPlan::count(const WindowedDataset& ds) const {
    if (pollution_rate < 0.0) throw DataError("pollution rate must be non-negative");
    double base_count = static_cast<double>(ds.size());
    if (base == ContaminationBase::LabeledAnomalies) {
        if (!ds.labels) throw DataError("labeled contamination base requires window labels");
        base_count = static_cast<double>(std::count(ds.labels->begin(), ds.labels->end(), std::uint8_t{1}));
    }
    return static_cast<std::size_t>(round_count(pollution_rate * base_count));
}

ContaminationResult inject_contamination(const WindowedDataset& ds, const ContaminationPlan& plan, Rng& rng) {
    ContaminationResult result{ds, {}};
    const std::size_t k = plan.count(ds);
    if (k == 0) return result;
    if (k > ds.size()) {
        throw DataError("contamination count " + std::to_string(k) + " exceeds the " + std::to_string(ds.size()) +
                        " available windows");
    }
    if (plan.kinds.empty()) throw DataError("contamination plan lists no anomaly kinds");

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    result.mask.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(result.mask.begin(), result.mask.end());

    const RowVector gmean = ds.data.colwise().mean();
    const RowVector gstd = column_std(ds.data, gmean);
    const Eigen::Index L = ds.window_length;
    const Eigen::Index m = std::min<Eigen::Index>(plan.pattern_length, L);

    auto& out = result.dataset;
    for (std::size_t idx : result.mask) {
        auto w = out.window(idx);
        const AnomalyKind kind = plan.kinds[uniform_index(rng, plan.kinds.size())];
        const auto col = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(ds.dim)));
        switch (kind) {
            case AnomalyKind::PointGlobal: {
                const auto t = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(L)));
                w(t, col) += random_sign(rng) * spike_magnitude(rng) * gstd(col);
                break;
            }
            case AnomalyKind::PointLocal: {
                const auto t = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(L)));
                const double mu = w.col(col).mean();
                const double sd = std::sqrt((w.col(col).array() - mu).square().mean());
                w(t, col) += random_sign(rng) * spike_magnitude(rng) * (sd > 0.0 ? sd : gstd(col));
                break;
            }
            case AnomalyKind::PatternShapelet: {
                const auto start = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(L - m + 1)));
                apply_shapelet(w, col, start, m, shapelet_factor(rng));
                break;
            }
        }
        out.injected[idx] = 1;
        if (out.labels) (*out.labels)[idx] = 1;
    }
    return result;
}

SyntheticSeries generate_synthetic(const SyntheticSpec& spec, const SeriesSpec& series, std::uint64_t seed) {
    spec.validate();
    series.validate();
    Rng rng = make_rng(seed, Stream::Contamination, 0x5e7);
    const Eigen::Index dim = series.dim;

    std::vector<double> phases(spec.periods.size() * static_cast<std::size_t>(dim));
    for (auto& p : phases) p = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);

    Eigen::Index offset = 0;
    auto clean = [&](Eigen::Index length) {
        RawSeries s;
        s.values.resize(length, dim);
        for (Eigen::Index t = 0; t < length; ++t) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                double v = 0.0;
                for (std::size_t k = 0; k < spec.periods.size(); ++k) {
                    const double phase = phases[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
                    v += spec.amplitudes[k] * std::sin(2.0 * std::numbers::pi * static_cast<double>(offset + t) /
                                                           spec.periods[k] +
                                                       phase);
                }
                s.values(t, c) = v + (spec.noise_sigma > 0.0 ? noise(rng) : 0.0);
            }
        }
        offset += length;
        s.labels.emplace(static_cast<std::size_t>(length), 0);
        return s;
    };

    auto with_events = [&](RawSeries s) {
        const Eigen::Index T = s.length();
        const Eigen::Index slot = std::max<Eigen::Index>(series.time_step, spec.pattern_length);
        const auto slots = static_cast<std::size_t>(T / slot);
        const auto events = static_cast<std::size_t>(round_count(spec.anomaly_rate * static_cast<double>(T) /
                                                                 static_cast<double>(slot)));
        if (events > slots) throw DataError("too many synthetic anomaly events for the series length");
        if (events == 0) return s;
        const RowVector mean = s.values.colwise().mean();
        const RowVector sd = column_std(s.values, mean);
        std::vector<std::size_t> order(slots);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(events);
        std::sort(order.begin(), order.end());
        const Eigen::Index m = std::min<Eigen::Index>(spec.pattern_length, slot);
        auto& labels = *s.labels;
        for (std::size_t e = 0; e < events; ++e) {
            const Eigen::Index base = static_cast<Eigen::Index>(order[e]) * slot;
            const AnomalyKind kind = spec.anomaly_kinds[uniform_index(rng, spec.anomaly_kinds.size())];
            const auto col = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(dim)));
            if (kind == AnomalyKind::PatternShapelet) {
                const Eigen::Index start =
                    base + static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(slot - m + 1)));
                apply_shapelet(s.values, col, start, m, shapelet_factor(rng));
                for (Eigen::Index t = start; t < start + m; ++t) labels[static_cast<std::size_t>(t)] = 1;
            } else {
                const Eigen::Index t =
                    base + static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(slot)));
                const double k = spike_magnitude(rng) * random_sign(rng);
                if (kind == AnomalyKind::PointGlobal) {
                    s.values(t, col) += k * sd(col);
                } else {
                    const Eigen::Index lo = std::max<Eigen::Index>(0, t - series.window_length / 2);
                    const Eigen::Index hi = std::min<Eigen::Index>(T, lo + series.window_length);
                    const auto local = s.values.col(col).segment(lo, hi - lo);
                    const double mu = local.mean();
                    const double lsd = std::sqrt((local.array() - mu).square().mean());
                    s.values(t, col) += k * (lsd > 0.0 ? lsd : sd(col));
                }
                labels[static_cast<std::size_t>(t)] = 1;
            }
        }
        return s;
    };

    SyntheticSeries out;
    out.train = clean(spec.train_length);
    if (spec.validation_length > 0) out.validation = with_events(clean(spec.validation_length));
    out.test = with_events(clean(spec.test_length));
    return out;
}

void write_series_csv(const std::filesystem::path& path, const RawSeries& series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "timestamp";
    for (Eigen::Index c = 0; c < series.dim(); ++c) out << ",value_" << c;
    if (series.labels) out << ",label";
    out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index t = 0; t < series.length(); ++t) {
        out << t;
        for (Eigen::Index c = 0; c < series.dim(); ++c) out << ',' << series.values(t, c);
        if (series.labels) out << ',' << static_cast<int>((*series.labels)[static_cast<std::size_t>(t)]);
        out << '\n';
    }
}

RawSeries read_series_csv(const std::filesystem::path& path, bool forward_fill) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.front() != "timestamp") {
        throw DataError("'" + path.string() + "': header must start with 'timestamp'");
    }
    const bool has_label = header.back() == "label";
    const std::size_t dim = header.size() - 1 - (has_label ? 1 : 0);
    if (dim == 0) throw DataError("'" + path.string() + "': no value columns");

    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    std::vector<double> last(dim, std::numeric_limits<double>::quiet_NaN());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != header.size()) {
            throw DataError("'" + path.string() + "' row " + std::to_string(row + 1) + ": expected " +
                            std::to_string(header.size()) + " columns");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!cells[c + 1].empty()) {
                char* end = nullptr;
                v = std::strtod(cells[c + 1].c_str(), &end);
                if (end == cells[c + 1].c_str()) v = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(v)) {
                if (!forward_fill || !std::isfinite(last[c])) {
                    throw DataError("'" + path.string() + "' row " + std::to_string(row + 1) + ": missing value");
                }
                v = last[c];
            }
            last[c] = v;
            values.push_back(v);
        }
        if (has_label) labels.push_back(cells.back() == "0" || cells.back().empty() ? 0 : 1);
        ++row;
    }
    RawSeries s;
    s.values = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(dim));
    if (has_label) s.labels = std::move(labels);
    return s;
}

void write_index_list(const std::filesystem::path& path, const std::vector<std::size_t>& indices) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (auto i : indices) out << i << '\n';
}

std::vector<std::size_t> read_index_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::size_t> out;
    std::size_t v;
    while (in >> v) out.push_back(v);
    return out;
}

}  // namespace roca
