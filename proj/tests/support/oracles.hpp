#pragma once

// Brute-force reference implementations. Written point by point from the
// metric definitions with no shared code from the library.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace roca::oracle {

using Bits = std::vector<std::uint8_t>;

struct Counts {
    double tp = 0, fp = 0, fn = 0;
};

inline double f1_of(const Counts& c, double* p_out = nullptr, double* r_out = nullptr) {
    const double p = c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0;
    const double r = c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0;
    if (p_out) *p_out = p;
    if (r_out) *r_out = r;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline Counts point_counts(const Bits& truth, const Bits& pred) {
    Counts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] && pred[i]) c.tp += 1;
        if (!truth[i] && pred[i]) c.fp += 1;
        if (truth[i] && !pred[i]) c.fn += 1;
    }
    return c;
}

// Bounds of the run of equal-valued points around i.
inline void run_bounds(const Bits& v, std::size_t i, std::size_t& lo, std::size_t& hi) {
    lo = i;
    hi = i;
    while (lo > 0 && v[lo - 1] == v[i]) --lo;
    while (hi + 1 < v.size() && v[hi + 1] == v[i]) ++hi;
}

// Adjust a truth point when more than k percent of its segment is predicted.
// k < 0 means "at least one point" (classic PA).
inline Bits adjust(const Bits& truth, const Bits& pred, double k) {
    Bits out = pred;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!truth[i]) continue;
        std::size_t lo, hi;
        run_bounds(truth, i, lo, hi);
        std::size_t hit = 0;
        for (std::size_t j = lo; j <= hi; ++j) hit += pred[j];
        const double len = static_cast<double>(hi - lo + 1);
        const bool credit = k < 0 ? hit > 0 : 100.0 * static_cast<double>(hit) / len > k;
        if (credit) out[i] = 1;
    }
    return out;
}

inline Bits pa_adjust(const Bits& truth, const Bits& pred) { return adjust(truth, pred, -1.0); }

inline Counts rpa_counts(const Bits& truth, const Bits& pred) {
    Counts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool starts_truth = truth[i] && (i == 0 || !truth[i - 1]);
        if (starts_truth) {
            std::size_t lo, hi;
            run_bounds(truth, i, lo, hi);
            bool hit = false;
            for (std::size_t j = lo; j <= hi; ++j) hit = hit || pred[j];
            (hit ? c.tp : c.fn) += 1;
        }
        const bool starts_pred = pred[i] && (i == 0 || !pred[i - 1]);
        if (starts_pred) {
            std::size_t lo, hi;
            run_bounds(pred, i, lo, hi);
            bool touches = false;
            for (std::size_t j = lo; j <= hi; ++j) touches = touches || truth[j];
            if (!touches) c.fp += 1;
        }
    }
    return c;
}

inline Bits from_mask(unsigned mask, std::size_t t) {
    Bits b(t);
    for (std::size_t i = 0; i < t; ++i) b[i] = (mask >> i) & 1u;
    return b;
}

}  // namespace roca::oracle
