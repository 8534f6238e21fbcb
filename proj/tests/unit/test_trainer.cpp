#include "roca/harness.hpp"
#include "roca/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace roca;

namespace {

ColVector col(std::initializer_list<double> v) {
    ColVector c(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) c(i++) = x;
    return c;
}

ExperimentConfig small_config() {
    ExperimentConfig c = profile_defaults("synthetic");
    set_config_value(c, "channels", "8");
    set_config_value(c, "lstm_layers", "1");
    set_config_value(c, "projector_hidden", "16");
    set_config_value(c, "synthetic_train_length", "1200");
    set_config_value(c, "synthetic_validation_length", "400");
    set_config_value(c, "synthetic_test_length", "800");
    set_config_value(c, "epochs", "6");
    set_config_value(c, "nu", "0.1");
    set_config_value(c, "batch_size", "64");
    set_config_value(c, "label_scope", "batch");
    set_config_value(c, "warmup_epochs", "3");
    c.validate();
    return c;
}

}  // namespace

TEST(EstimateLabels, Examples) {
    const auto zero = estimate_labels(col({4, 3, 2, 1}), 0.0);
    EXPECT_EQ(zero, (std::vector<std::uint8_t>{0, 0, 0, 0}));
    EXPECT_EQ(estimate_labels(col({1, 5, 3, 2}), 0.25), (std::vector<std::uint8_t>{0, 1, 0, 0}));
    EXPECT_EQ(estimate_labels(col({2, 2, 2, 2}), 0.5), (std::vector<std::uint8_t>{1, 1, 0, 0}));
    EXPECT_THROW(estimate_labels(col({1}), 1.0), std::invalid_argument);
}

TEST(EstimateLabels, BudgetIsExact) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int n : {1, 7, 64, 100}) {
        ColVector s(n);
        for (int i = 0; i < n; ++i) s(i) = u(rng);
        for (double nu : {0.0, 0.05, 0.1, 0.33}) {
            const auto y = estimate_labels(s, nu);
            EXPECT_EQ(std::count(y.begin(), y.end(), 1), round_count(nu * n));
        }
    }
}

TEST(Trainer, WarmupBudgetAndFreeze) {
    const ExperimentConfig c = small_config();
    const PreparedData d = prepare_synthetic(c);
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    const TrainState st = fit(m, d.train, c);

    ASSERT_EQ(st.history.size(), 6u);
    ASSERT_EQ(st.label_log.size(), 6u);
    const int freeze = c.train.effective_center_freeze();
    std::optional<RowVector> frozen;
    for (const auto& b : st.batch_log) {
        EXPECT_EQ(b.batch_size, 64u);
        if (b.epoch < c.train.warmup_epochs) {
            EXPECT_EQ(b.label_count, 0u);
        } else {
            EXPECT_EQ(b.label_count, 6u);
        }
        if (b.epoch >= freeze) {
            if (!frozen) frozen = b.center;
            EXPECT_TRUE(b.center == *frozen);
        }
    }
    ASSERT_TRUE(frozen);
    ASSERT_TRUE(m.center());
    EXPECT_TRUE(*m.center() == *frozen);
}

TEST(Trainer, CocaNeverLabels) {
    ExperimentConfig c = small_config();
    c.variant = VariantId::parse("coca");
    set_config_value(c, "epochs", "4");
    const PreparedData d = prepare_synthetic(c);
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    const TrainState st = fit(m, d.train, c);
    for (const auto& b : st.batch_log) EXPECT_EQ(b.label_count, 0u);
}

TEST(Trainer, ZeroEpochs) {
    ExperimentConfig c = small_config();
    set_config_value(c, "epochs", "0");
    const PreparedData d = prepare_synthetic(c);
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    const std::string before = [&] {
        std::vector<Matrix> v;
        for (const auto& p : m.parameters()) v.push_back(p.value());
        return std::to_string(v.front().sum());
    }();
    const TrainState st = fit(m, d.train, c);
    EXPECT_TRUE(st.history.empty());
    EXPECT_TRUE(m.center().has_value());
    EXPECT_EQ(std::to_string(m.parameters().front().value().sum()), before);
}

TEST(Trainer, NonFiniteLossAborts) {
    const ExperimentConfig c = small_config();
    PreparedData d = prepare_synthetic(c);
    d.train.data(5, 0) = std::numeric_limits<double>::quiet_NaN();
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    try {
        fit(m, d.train, c);
        FAIL() << "expected an abort";
    } catch (const TrainingAborted& e) {
        EXPECT_EQ(e.epoch(), 0);
        EXPECT_GE(e.batch(), 0);
        EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
    }
}

TEST(Trainer, RejectsMismatchedWindows) {
    ExperimentConfig c = small_config();
    const PreparedData d = prepare_synthetic(c);
    set_config_value(c, "window_length", "32");
    set_config_value(c, "time_step", "16");
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    EXPECT_THROW(fit(m, d.train, c), DataError);
}

TEST(Trainer, VarianceTermPreventsCollapse) {
    ExperimentConfig c = small_config();
    set_config_value(c, "epochs", "8");
    const PreparedData d = prepare_synthetic(c);
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel m(EncoderSpec::from_config(c), init);
    const TrainState st = fit(m, d.train, c);
    const auto& val = d.validation->windows;
    const auto out = m.forward(val.data, static_cast<Eigen::Index>(val.size()), false);
    const Matrix& raw = out.raw_q.value();
    const RowVector mean = raw.colwise().mean();
    const RowVector sd =
        ((raw.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(raw.rows() - 1)).sqrt();
    EXPECT_GE(sd.minCoeff(), 0.1 * c.train.zeta);

    int non_increasing = 0;
    for (std::size_t e = 1; e < st.history.size(); ++e) {
        non_increasing += st.history[e].mean_loss <= st.history[e - 1].mean_loss;
    }
    EXPECT_GE(non_increasing, 1);
}

TEST(Trainer, Deterministic) {
    ExperimentConfig c = small_config();
    set_config_value(c, "epochs", "4");
    const PreparedData d = prepare_synthetic(c);
    auto run = [&] {
        Rng init = make_rng(c.train.seed, Stream::Init);
        RocaModel m(EncoderSpec::from_config(c), init);
        fit(m, d.train, c);
        return *m.center();
    };
    EXPECT_TRUE(run() == run());
}
