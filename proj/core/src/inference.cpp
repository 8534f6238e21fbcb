#include "roca/inference.hpp"

#include "roca/losses.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace roca {

std::vector<double> score(RocaModel& model, const WindowedDataset& ds) {
    if (!model.center()) throw ContractError("scoring needs a model with a frozen center");
    const Projections p = project_dataset(model, ds);
    const ColVector l = invariance_values(p.q, p.qp, *model.center());
    return {l.data(), l.data() + l.size()};
}

std::vector<double> zscores(const std::vector<double>& raw, std::vector<std::string>* warnings) {
    const auto n = static_cast<double>(raw.size());
    std::vector<double> z(raw.size(), 0.0);
    if (raw.empty()) return z;
    double mean = 0.0;
    for (double v : raw) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : raw) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0)) {
        if (warnings) warnings->push_back("constant score vector; z-scores set to 0");
        return z;
    }
    for (std::size_t i = 0; i < raw.size(); ++i) z[i] = (raw[i] - mean) / sd;
    return z;
}

const std::vector<double>& threshold_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = -300; i <= 300; ++i) g.push_back(static_cast<double>(i) / 100.0);
        return g;
    }();
    return grid;
}

Labels apply_threshold(const std::vector<double>& z, double tau) {
    Labels d(z.size(), 0);
    for (std::size_t i = 0; i < z.size(); ++i) d[i] = z[i] > tau ? 1 : 0;
    return d;
}

Labels top1_rule(const std::vector<double>& raw) {
    Labels d(raw.size(), 0);
    if (raw.empty()) return d;
    std::size_t best = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (raw[i] > raw[best]) best = i;
    }
    d[best] = 1;
    return d;
}

Labels expand_to_points(const Labels& decisions, const std::vector<std::int64_t>& origin, std::int64_t window_length,
                        std::size_t length) {
    if (decisions.size() != origin.size()) throw std::invalid_argument("decisions and origins differ in length");
    Labels points(length, 0);
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (!decisions[i]) continue;
        const auto lo = static_cast<std::size_t>(std::max<std::int64_t>(0, origin[i]));
        const auto hi = std::min<std::size_t>(length, static_cast<std::size_t>(origin[i] + window_length));
        for (std::size_t t = lo; t < hi; ++t) points[t] = 1;
    }
    return points;
}

ThresholdChoice select_threshold(const std::vector<double>& raw, const ThresholdTarget* target) {
    ThresholdChoice choice;
    for (double v : raw) {
        if (!std::isfinite(v)) throw std::invalid_argument("select_threshold: non-finite score");
    }
    const std::vector<double> z = zscores(raw, &choice.warnings);
    if (!choice.warnings.empty() || !target) return choice;
    if (!target->origin || !target->truth) throw std::invalid_argument("threshold target is incomplete");

    double best = -1.0;
    for (double tau : threshold_grid()) {
        const Labels points =
            expand_to_points(apply_threshold(z, tau), *target->origin, target->window_length, target->truth->size());
        const double f1 = score_metric(target->metric, *target->truth, points, target->pak_k).f1;
        if (f1 > best) {
            best = f1;
            choice.tau = tau;
        }
    }
    choice.objective = best;
    choice.defaulted = false;
    return choice;
}

ScoreSeries decide(std::vector<double> raw, double tau, bool top1, const std::vector<std::int64_t>& origin,
                   std::int64_t window_length, std::size_t length) {
    ScoreSeries s;
    s.raw = std::move(raw);
    s.z = zscores(s.raw);
    s.tau = tau;
    s.decisions = top1 ? top1_rule(s.raw) : apply_threshold(s.z, tau);
    s.point_decisions = expand_to_points(s.decisions, origin, window_length, length);
    return s;
}

void write_scores(std::ostream& out, const ScoreSeries& s) {
    out << "index,raw,zscore,decision\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < s.raw.size(); ++i) {
        out << i << ',' << s.raw[i] << ',' << s.z[i] << ',' << static_cast<int>(s.decisions[i]) << '\n';
    }
}

}  // namespace roca
