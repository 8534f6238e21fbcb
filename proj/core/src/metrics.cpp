#include "roca/metrics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace roca {

namespace {

void require_stream(const Labels& truth, const Labels& pred) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("truth and prediction lengths differ (" + std::to_string(truth.size()) + " vs " +
                                    std::to_string(pred.size()) + ")");
    }
}

std::map<std::string, MetricPlugin>& plugin_table() {
    static std::map<std::string, MetricPlugin> table;
    return table;
}

std::mutex& plugin_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Prf prf_from_counts(double tp, double fp, double fn) {
    Prf r;
    r.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    r.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

std::vector<Segment> segments(const Labels& truth) {
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < truth.size()) {
        if (!truth[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < truth.size() && truth[j + 1]) ++j;
        out.push_back({i, j});
        i = j + 1;
    }
    return out;
}

Prf pw_scores(const Labels& truth, const Labels& pred) {
    require_stream(truth, pred);
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i] && truth[i]) {
            ++tp;
        } else if (pred[i]) {
            ++fp;
        } else if (truth[i]) {
            ++fn;
        }
    }
    return prf_from_counts(tp, fp, fn);
}

Labels pak_adjust(const Labels& truth, const Labels& pred, double k_percent) {
    require_stream(truth, pred);
    if (!(k_percent >= 0.0 && k_percent <= 100.0)) throw std::invalid_argument("K must lie in [0, 100]");
    Labels out = pred;
    for (const auto& s : segments(truth)) {
        std::size_t hits = 0;
        for (std::size_t t = s.start; t <= s.end; ++t) hits += pred[t] ? 1 : 0;
        const double len = static_cast<double>(s.end - s.start + 1);
        if (hits > 0 && static_cast<double>(hits) / len * 100.0 > k_percent) {
            for (std::size_t t = s.start; t <= s.end; ++t) out[t] = 1;
        }
    }
    return out;
}

Labels pa_adjust(const Labels& truth, const Labels& pred) { return pak_adjust(truth, pred, 0.0); }

Prf pa_scores(const Labels& truth, const Labels& pred) { return pw_scores(truth, pa_adjust(truth, pred)); }

Prf pak_scores(const Labels& truth, const Labels& pred, double k_percent) {
    return pw_scores(truth, pak_adjust(truth, pred, k_percent));
}

RpaCounts rpa_counts(const Labels& truth, const Labels& pred) {
    require_stream(truth, pred);
    RpaCounts c;
    for (const auto& s : segments(truth)) {
        bool hit = false;
        for (std::size_t t = s.start; t <= s.end && !hit; ++t) hit = pred[t] != 0;
        if (hit) {
            ++c.tp;
        } else {
            ++c.fn;
        }
    }
    for (const auto& p : segments(pred)) {
        bool touches = false;
        for (std::size_t t = p.start; t <= p.end && !touches; ++t) touches = truth[t] != 0;
        if (!touches) ++c.fp;
    }
    return c;
}

Prf rpa_scores(const Labels& truth, const Labels& pred) {
    const RpaCounts c = rpa_counts(truth, pred);
    return prf_from_counts(static_cast<double>(c.tp), static_cast<double>(c.fp), static_cast<double>(c.fn));
}

Prf score_metric(MetricKind kind, const Labels& truth, const Labels& pred, double pak_k) {
    switch (kind) {
        case MetricKind::PW: return pw_scores(truth, pred);
        case MetricKind::PA: return pa_scores(truth, pred);
        case MetricKind::PAK: return pak_scores(truth, pred, pak_k);
        case MetricKind::RPA: return rpa_scores(truth, pred);
    }
    return {};
}

std::string metric_label(MetricKind kind, double pak_k) {
    if (kind == MetricKind::PAK) {
        std::ostringstream os;
        os << "PA%K(" << pak_k << ")";
        return os.str();
    }
    switch (kind) {
        case MetricKind::PW: return "PW";
        case MetricKind::PA: return "PA";
        case MetricKind::RPA: return "RPA";
        default: return "";
    }
}

const Prf& EvalOutcome::get(MetricKind kind) const {
    switch (kind) {
        case MetricKind::PW: return pw;
        case MetricKind::PA: return pa;
        case MetricKind::PAK: return pak;
        case MetricKind::RPA: return rpa;
    }
    return rpa;
}

EvalOutcome evaluate_stream(const std::string& subset, const Labels& truth, const Labels& pred, double pak_k) {
    EvalOutcome o;
    o.subset = subset;
    o.segment_count = segments(truth).size();
    o.pw = pw_scores(truth, pred);
    o.pa = pa_scores(truth, pred);
    o.pak = pak_scores(truth, pred, pak_k);
    o.rpa = rpa_scores(truth, pred);
    return o;
}

double aggregate(const std::vector<WeightedF1>& parts) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.segments;
    if (total == 0) throw std::invalid_argument("aggregate: no anomaly segments in any subset");
    double f1 = 0.0;
    for (const auto& p : parts) f1 += static_cast<double>(p.segments) / static_cast<double>(total) * p.f1;
    return f1;
}

std::vector<double> ras_baseline(std::size_t length, Rng& rng) {
    if (length == 0) throw std::invalid_argument("ras_baseline: length must be >= 1");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(length);
    for (auto& v : out) {
        v = u(rng);
        if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    }
    return out;
}

void register_metric(const std::string& name, MetricPlugin fn) {
    std::lock_guard lock(plugin_mutex());
    plugin_table()[name] = std::move(fn);
}

std::optional<MetricPlugin> find_metric(const std::string& name) {
    std::lock_guard lock(plugin_mutex());
    auto it = plugin_table().find(name);
    if (it == plugin_table().end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> registered_metrics() {
    std::lock_guard lock(plugin_mutex());
    std::vector<std::string> out;
    for (const auto& [name, fn] : plugin_table()) out.push_back(name);
    return out;
}

}  // namespace roca
