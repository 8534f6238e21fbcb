#include "roca/inference.hpp"
#include "roca/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace roca;

namespace {

std::vector<std::int64_t> iota_origin(std::size_t n) {
    std::vector<std::int64_t> o(n);
    std::iota(o.begin(), o.end(), 0);
    return o;
}

EncoderSpec tiny_spec() {
    EncoderSpec s;
    s.input_dim = 1;
    s.window_length = 16;
    s.channels = 6;
    s.projector_hidden = 8;
    s.projection_dim = 4;
    s.lstm_layers = 1;
    return s;
}

WindowedDataset random_windows(std::size_t n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    WindowedDataset ds;
    ds.window_length = 16;
    ds.dim = 1;
    ds.data.resize(static_cast<Eigen::Index>(n) * 16, 1);
    for (Eigen::Index i = 0; i < ds.data.size(); ++i) ds.data.data()[i] = g(rng);
    ds.origin = iota_origin(n);
    return ds;
}

}  // namespace

TEST(Threshold, GridShape) {
    const auto& g = threshold_grid();
    ASSERT_EQ(g.size(), 601u);
    EXPECT_EQ(g.front(), -3.0);
    EXPECT_EQ(g.back(), 3.0);
    EXPECT_NEAR(g[300], 0.0, 1e-12);
}

TEST(Threshold, DefaultWithoutLabels) {
    const auto c = select_threshold({0.1, 0.5, 0.2, 0.9});
    EXPECT_EQ(c.tau, 3.0);
    EXPECT_TRUE(c.defaulted);
    EXPECT_TRUE(c.warnings.empty());
}

TEST(Threshold, ConstantScoresWarn) {
    std::vector<std::string> warnings;
    const auto z = zscores({2.0, 2.0, 2.0}, &warnings);
    EXPECT_EQ(z, (std::vector<double>{0.0, 0.0, 0.0}));
    EXPECT_EQ(warnings.size(), 1u);
    const auto origin = iota_origin(3);
    const Labels truth{0, 0, 1};
    ThresholdTarget t{&origin, 1, &truth, MetricKind::PA};
    const auto c = select_threshold({2.0, 2.0, 2.0}, &t);
    EXPECT_EQ(c.tau, 3.0);
    EXPECT_FALSE(c.warnings.empty());
}

TEST(Threshold, SmallestMaximizingTau) {
    // z = [-1/sqrt(3) x3, sqrt(3)]; tau in [-0.57, 1.73] isolates the last point,
    // and the grid picks its smallest member.
    const auto origin = iota_origin(4);
    const Labels truth{0, 0, 0, 1};
    ThresholdTarget t{&origin, 1, &truth, MetricKind::PW};
    const auto c = select_threshold({0, 0, 0, 10}, &t);
    EXPECT_NEAR(c.tau, -0.57, 1e-9);
    EXPECT_EQ(c.objective, 1.0);
    EXPECT_FALSE(c.defaulted);
}

TEST(Threshold, PopulationZscores) {
    const auto z = zscores({1.0, 3.0});
    EXPECT_NEAR(z[0], -1.0, 1e-12);
    EXPECT_NEAR(z[1], 1.0, 1e-12);
}

TEST(Threshold, MonotoneAndShiftInvariant) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    std::vector<double> raw(200);
    for (double& v : raw) v = u(rng);
    std::size_t prev = raw.size() + 1;
    for (double tau : threshold_grid()) {
        const auto d = apply_threshold(zscores(raw), tau);
        const auto flagged = static_cast<std::size_t>(std::count(d.begin(), d.end(), 1));
        EXPECT_LE(flagged, prev);
        prev = flagged;
    }
    std::vector<double> shifted = raw;
    for (double& v : shifted) v += 17.0;
    EXPECT_EQ(apply_threshold(zscores(raw), 0.5), apply_threshold(zscores(shifted), 0.5));
}

TEST(Top1, Examples) {
    EXPECT_EQ(top1_rule({1, 9, 3}), (Labels{0, 1, 0}));
    EXPECT_EQ(top1_rule({5, 5}), (Labels{1, 0}));
    Rng rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> r(50);
    for (double& v : r) v = u(rng);
    const auto d = top1_rule(r);
    EXPECT_EQ(std::count(d.begin(), d.end(), 1), 1);
}

TEST(Expand, Examples) {
    const auto one = expand_to_points({1, 0}, {0, 16}, 16, 40);
    for (std::size_t t = 0; t < 40; ++t) EXPECT_EQ(one[t], t < 16 ? 1 : 0) << t;
    const auto none = expand_to_points({0, 0}, {0, 16}, 16, 40);
    EXPECT_EQ(std::count(none.begin(), none.end(), 1), 0);
    const auto both = expand_to_points({1, 0, 1}, {0, 8, 12}, 16, 40);
    for (std::size_t t = 0; t < 40; ++t) EXPECT_EQ(both[t], t < 28 ? 1 : 0) << t;
}

TEST(Score, MatchesLossInEvalMode) {
    Rng init(3), data(4);
    RocaModel m(tiny_spec(), init);
    const auto ds = random_windows(12, data);
    EXPECT_THROW(score(m, ds), ContractError);
    const auto out = m.forward(ds.data, 12, false);
    m.set_center(compute_center(out.q.value(), out.qp.value()));
    const auto s = score(m, ds);
    const ColVector l = invariance_values(out.q.value(), out.qp.value(), *m.center());
    ASSERT_EQ(s.size(), 12u);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], l(static_cast<Eigen::Index>(i)), 1e-6);
}

TEST(Decide, WritesColumns) {
    const auto s = decide({0, 0, 0, 10}, 1.0, false, iota_origin(4), 1, 4);
    EXPECT_EQ(s.decisions, (Labels{0, 0, 0, 1}));
    std::ostringstream out;
    write_scores(out, s);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, 26), "index,raw,zscore,decision\n");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
