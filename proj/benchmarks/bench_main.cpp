#include "roca/harness.hpp"
#include "roca/losses.hpp"
#include "roca/metrics.hpp"
#include "roca/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace roca;

namespace {

Matrix unit_rows(Eigen::Index n, Eigen::Index p, Rng& rng) {
    std::normal_distribution<double> g;
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = g(rng);
        m.row(i).normalize();
    }
    return m;
}

Labels random_bits(std::size_t n, double rate, Rng& rng) {
    std::bernoulli_distribution b(rate);
    Labels out(n);
    for (auto& v : out) v = b(rng);
    return out;
}

ExperimentConfig bench_config() {
    ExperimentConfig c = profile_defaults("synthetic");
    set_config_value(c, "variant", "roca");
    return c;
}

}  // namespace

static void BM_InvarianceValues(benchmark::State& state) {
    Rng rng(1);
    const auto n = state.range(0);
    const Matrix q = unit_rows(n, 16, rng), qp = unit_rows(n, 16, rng);
    const RowVector ce = unit_rows(1, 16, rng).row(0);
    for (auto _ : state) benchmark::DoNotOptimize(invariance_values(q, qp, ce));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_InvarianceValues)->Arg(64)->Arg(4096);

static void BM_EstimateLabels(benchmark::State& state) {
    Rng rng(2);
    std::uniform_real_distribution<double> u(-4, 4);
    ColVector s(state.range(0));
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_labels(s, 0.05));
}
BENCHMARK(BM_EstimateLabels)->Arg(64)->Arg(6000);

static void BM_RpaScores(benchmark::State& state) {
    Rng rng(3);
    const auto n = static_cast<std::size_t>(state.range(0));
    const Labels truth = random_bits(n, 0.02, rng), pred = random_bits(n, 0.05, rng);
    for (auto _ : state) benchmark::DoNotOptimize(rpa_scores(truth, pred));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RpaScores)->Arg(8000)->Arg(1 << 20);

static void BM_ThresholdSearch(benchmark::State& state) {
    Rng rng(4);
    const std::size_t windows = 999, length = 8000;
    std::vector<std::int64_t> origin(windows);
    for (std::size_t i = 0; i < windows; ++i) origin[i] = static_cast<std::int64_t>(i * 8);
    std::normal_distribution<double> g;
    std::vector<double> raw(windows);
    for (auto& v : raw) v = g(rng);
    const Labels truth = random_bits(length, 0.02, rng);
    ThresholdTarget target{&origin, 16, &truth, MetricKind::PA, 20.0};
    for (auto _ : state) benchmark::DoNotOptimize(select_threshold(raw, &target));
}
BENCHMARK(BM_ThresholdSearch)->Unit(benchmark::kMillisecond);

static void BM_ForwardEval(benchmark::State& state) {
    const ExperimentConfig c = bench_config();
    Rng init(5);
    RocaModel model(EncoderSpec::from_config(c), init);
    std::normal_distribution<double> g;
    const auto batch = state.range(0);
    Matrix x(batch * c.series.window_length, 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = g(init);
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, batch, false).q.value());
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardEval)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
    const ExperimentConfig c = bench_config();
    const PreparedData d = prepare_synthetic(c);
    Rng init = make_rng(c.train.seed, Stream::Init);
    RocaModel model(EncoderSpec::from_config(c), init);
    TrainState st = make_train_state(model, c);
    for (auto _ : state) train_epoch(model, d.train, c, st);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.train.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
