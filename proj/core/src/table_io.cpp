#include "roca/table_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace roca {

void write_results(std::ostream& out, const std::vector<ResultRow>& rows, bool header) {
    if (header) out << kResultsHeader << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.subset << ',' << r.variant << ',' << r.metric << ',' << r.precision << ','
            << r.recall << ',' << r.f1 << ',' << r.segments << ',' << r.tau << ',' << r.seed << ',' << r.threshold_mode
            << ',' << r.manifest_hash << '\n';
    }
}

std::vector<ResultRow> read_results(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    if (line != kResultsHeader) throw std::runtime_error("results table has an unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) c.push_back(cell);
        if (line.back() == ',') c.emplace_back();
        if (c.size() != 12) throw std::runtime_error("results row has " + std::to_string(c.size()) + " columns");
        ResultRow r;
        r.dataset = c[0];
        r.subset = c[1];
        r.variant = c[2];
        r.metric = c[3];
        r.precision = std::stod(c[4]);
        r.recall = std::stod(c[5]);
        r.f1 = std::stod(c[6]);
        r.segments = std::stoul(c[7]);
        r.tau = std::stod(c[8]);
        r.seed = std::stoull(c[9]);
        r.threshold_mode = c[10];
        r.manifest_hash = c[11];
        rows.push_back(std::move(r));
    }
    return rows;
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    if (values.empty()) return ms;
    for (double v : values) ms.mean += v;
    ms.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
        ms.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return ms;
}

std::string format_mean_std(const MeanStd& ms) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << ms.mean * 100.0 << "±" << ms.stddev * 100.0;
    return os.str();
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("box_stats: no values");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.q1 = interpolated_quantile(values, 0.25);
    b.median = interpolated_quantile(values, 0.5);
    b.q3 = interpolated_quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.min = b.q1;
    b.max = b.q3;
    bool first = true;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
            continue;
        }
        if (first) {
            b.min = v;
            first = false;
        }
        b.max = v;
    }
    return b;
}

void write_summary(std::ostream& out, const std::vector<ResultRow>& rows) {
    // (dataset, variant, metric, mode) -> seed -> per-subset rows
    using Key = std::tuple<std::string, std::string, std::string, std::string>;
    std::map<Key, std::map<std::uint64_t, std::vector<const ResultRow*>>> groups;
    for (const auto& r : rows) groups[{r.dataset, r.variant, r.metric, r.threshold_mode}][r.seed].push_back(&r);

    out << std::left << std::setw(12) << "dataset" << std::setw(12) << "variant" << std::setw(12) << "metric"
        << std::setw(12) << "threshold" << std::setw(16) << "P(%)" << std::setw(16) << "R(%)" << std::setw(16)
        << "F1(%)" << "runs\n";
    for (const auto& [key, by_seed] : groups) {
        std::vector<double> p, r, f;
        for (const auto& [seed, subset_rows] : by_seed) {
            std::size_t total = 0;
            for (const auto* row : subset_rows) total += row->segments;
            double wp = 0, wr = 0, wf = 0;
            for (const auto* row : subset_rows) {
                const double w = total > 0 ? static_cast<double>(row->segments) / static_cast<double>(total)
                                           : 1.0 / static_cast<double>(subset_rows.size());
                wp += w * row->precision;
                wr += w * row->recall;
                wf += w * row->f1;
            }
            p.push_back(wp);
            r.push_back(wr);
            f.push_back(wf);
        }
        // "±" is two bytes in UTF-8; pad by display width.
        auto cell = [&](const std::string& s) { out << s << std::string(s.size() < 17 ? 17 - s.size() : 1, ' '); };
        out << std::setw(12) << std::get<0>(key) << std::setw(12) << std::get<1>(key) << std::setw(12)
            << std::get<2>(key) << std::setw(12) << std::get<3>(key);
        cell(format_mean_std(mean_std(p)));
        cell(format_mean_std(mean_std(r)));
        cell(format_mean_std(mean_std(f)));
        out << by_seed.size() << '\n';
    }
}

}  // namespace roca
