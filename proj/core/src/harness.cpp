#include "roca/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roca {

namespace {

WindowedDataset training_windows(const RawSeries& normalized, const ExperimentConfig& config,
                                 ContaminationBase base, std::vector<std::size_t>* mask) {
    WindowedDataset w = make_windows(normalized, config.series);
    ContaminationPlan plan;
    plan.pollution_rate = config.synthetic.train_pollution_rate;
    plan.kinds = config.synthetic.anomaly_kinds;
    plan.base = base;
    plan.pattern_length = config.synthetic.pattern_length;
    Rng crng = make_rng(config.train.seed, Stream::Contamination, 1);
    ContaminationResult c = inject_contamination(w, plan, crng);
    if (mask) *mask = c.mask;
    if (!config.augmentation.enabled) return std::move(c.dataset);
    Rng arng = make_rng(config.train.seed, Stream::Augmentation);
    return augment(c.dataset, config.augmentation, arng);
}

std::string combined_fingerprint(const PreparedData& d) {
    std::string text = fingerprint(d.train) + fingerprint(d.test.windows);
    if (d.validation) text += fingerprint(d.validation->windows);
    return sha256_hex(text);
}

}  // namespace

EvalStream make_eval_stream(const RawSeries& normalized, const SeriesSpec& spec) {
    EvalStream s;
    s.windows = make_windows(normalized, spec);
    s.length = static_cast<std::size_t>(normalized.length());
    s.truth = normalized.labels ? *normalized.labels : Labels(s.length, 0);
    return s;
}

PreparedData prepare_splits(const std::string& dataset, const std::string& subset, const RawSeries& train,
                            const std::optional<RawSeries>& validation, const RawSeries& test,
                            const ExperimentConfig& config) {
    config.validate();
    if (train.dim() != config.series.dim) {
        throw DataError("subset '" + subset + "' has " + std::to_string(train.dim()) +
                        " dimensions but the profile expects " + std::to_string(config.series.dim));
    }
    if (test.dim() != train.dim()) throw DataError("subset '" + subset + "': train and test dimensions differ");
    PreparedData d;
    d.dataset = dataset;
    d.subset = subset;
    RawSeries train_part = train;
    std::optional<RawSeries> val_part = validation;
    if (!val_part) {
        const Eigen::Index T = train.length();
        const auto val_len =
            static_cast<Eigen::Index>(std::floor(config.train.validation_fraction * static_cast<double>(T)));
        if (val_len >= config.series.window_length && T - val_len >= config.series.window_length) {
            train_part.values = train.values.topRows(T - val_len);
            RawSeries v;
            v.values = train.values.bottomRows(val_len);
            if (train.labels) {
                train_part.labels = Labels(train.labels->begin(), train.labels->end() - val_len);
                v.labels = Labels(train.labels->end() - val_len, train.labels->end());
            }
            val_part = std::move(v);
        }
    }
    d.normalizer = Normalizer::fit(train_part);
    const bool labeled = train_part.labels &&
                         std::any_of(train_part.labels->begin(), train_part.labels->end(), [](auto v) { return v != 0; });
    const auto base = labeled ? ContaminationBase::LabeledAnomalies : ContaminationBase::Windows;
    d.train = training_windows(d.normalizer.apply(train_part), config, base, &d.contamination_mask);
    if (val_part && val_part->length() >= config.series.window_length) {
        d.validation = make_eval_stream(d.normalizer.apply(*val_part), config.series);
    }
    d.test = make_eval_stream(d.normalizer.apply(test), config.series);
    d.fingerprint = combined_fingerprint(d);
    return d;
}

PreparedData prepare_synthetic(const ExperimentConfig& config) {
    config.validate();
    const SyntheticSeries syn = generate_synthetic(config.synthetic, config.series, config.train.seed);
    std::optional<RawSeries> validation;
    if (syn.validation.length() > 0) validation = syn.validation;
    return prepare_splits("synthetic", "synthetic", syn.train, validation, syn.test, config);
}

PreparedData prepare_subset(const BenchmarkSubset& subset, const ExperimentConfig& config) {
    return prepare_splits(config.profile, subset.name, subset.train, std::nullopt, subset.test, config);
}

TrialResult evaluate_scores(const std::vector<double>& test_raw, const std::vector<double>* validation_raw,
                            const PreparedData& data, const ExperimentConfig& config) {
    const EvalOptions& ev = config.eval;
    TrialResult t;
    t.seed = config.train.seed;
    if (!ev.top1) {
        switch (ev.threshold_mode) {
            case ThresholdMode::Sigma3:
                t.threshold = select_threshold(test_raw, nullptr);
                break;
            case ThresholdMode::Test: {
                ThresholdTarget target{&data.test.windows.origin, data.test.windows.window_length, &data.test.truth,
                                       ev.threshold_metric, ev.pak_k};
                t.threshold = select_threshold(test_raw, &target);
                break;
            }
            case ThresholdMode::Validation: {
                if (!validation_raw || !data.validation) {
                    throw ConfigError("threshold_mode", "validation mode needs a validation stream");
                }
                ThresholdTarget target{&data.validation->windows.origin, data.validation->windows.window_length,
                                       &data.validation->truth, ev.threshold_metric, ev.pak_k};
                t.threshold = select_threshold(*validation_raw, &target);
                break;
            }
        }
        if (!t.threshold.defaulted && !(t.threshold.objective > 0.0)) {
            t.threshold.tau = kDefaultTau;
            t.threshold.defaulted = true;
            t.threshold.warnings.push_back("no threshold reaches a positive F1 on the target; using the 3-sigma default");
        }
    }
    t.test_scores = decide(test_raw, t.threshold.tau, ev.top1, data.test.windows.origin,
                           data.test.windows.window_length, data.test.length);
    t.outcome = evaluate_stream(data.subset, data.test.truth, t.test_scores.point_decisions, ev.pak_k);
    return t;
}

TrialResult run_ras(const PreparedData& data, const ExperimentConfig& config) {
    Rng rng = make_rng(config.train.seed, Stream::Init, 0x7a5);
    const std::vector<double> test_raw = ras_baseline(data.test.windows.size(), rng);
    std::vector<double> val_raw;
    if (data.validation) val_raw = ras_baseline(data.validation->windows.size(), rng);
    TrialResult t = evaluate_scores(test_raw, data.validation ? &val_raw : nullptr, data, config);
    t.variant = "ras";
    RunManifest m = make_manifest(config, data.fingerprint);
    m.notes["detector"] = "ras";
    m.finished_at = utc_timestamp();
    t.manifest_hash = m.hash();
    return t;
}

ModelTrial run_model_trial(const PreparedData& data, const ExperimentConfig& config) {
    ModelTrial out;
    Rng init = make_rng(config.train.seed, Stream::Init);
    out.model.emplace(EncoderSpec::from_config(config), init);
    RunManifest m = make_manifest(config, data.fingerprint);
    out.state = fit(*out.model, data.train, config, data.validation ? &data.validation->windows : nullptr);
    out.result = evaluate_model(*out.model, data, config);
    if (out.state.early_stop_epoch) m.notes["early_stop_epoch"] = std::to_string(*out.state.early_stop_epoch);
    m.notes["epochs_run"] = std::to_string(out.state.epoch);
    m.finished_at = utc_timestamp();
    out.result.manifest_hash = m.hash();
    return out;
}

TrialResult evaluate_model(RocaModel& model, const PreparedData& data, const ExperimentConfig& config) {
    const std::vector<double> test_raw = score(model, data.test.windows);
    std::vector<double> val_raw;
    if (data.validation) val_raw = score(model, data.validation->windows);
    TrialResult t = evaluate_scores(test_raw, data.validation ? &val_raw : nullptr, data, config);
    t.variant = config.variant.name();
    return t;
}

TrialResult run_synthetic_trial(const ExperimentConfig& config, Detector detector) {
    const PreparedData data = prepare_synthetic(config);
    if (detector == Detector::Ras) return run_ras(data, config);
    return run_model_trial(data, config).result;
}

std::vector<ResultRow> result_rows(const TrialResult& trial, const PreparedData& data, const ExperimentConfig& config) {
    std::vector<ResultRow> rows;
    for (MetricKind k : {MetricKind::PW, MetricKind::PA, MetricKind::PAK, MetricKind::RPA}) {
        const Prf& p = trial.outcome.get(k);
        ResultRow r;
        r.dataset = data.dataset;
        r.subset = data.subset;
        r.variant = trial.variant;
        r.metric = metric_label(k, config.eval.pak_k);
        r.precision = p.precision;
        r.recall = p.recall;
        r.f1 = p.f1;
        r.segments = trial.outcome.segment_count;
        r.tau = trial.threshold.tau;
        r.seed = trial.seed;
        r.threshold_mode = config.eval.top1 ? "top1" : to_string(config.eval.threshold_mode);
        r.manifest_hash = trial.manifest_hash;
        rows.push_back(std::move(r));
    }
    return rows;
}

void apply_sweep_value(ExperimentConfig& config, const std::string& parameter, double value) {
    if (parameter == "mu") {
        config.train.mu = value;
    } else if (parameter == "nu") {
        config.train.nu = value;
    } else if (parameter == "pr") {
        config.synthetic.train_pollution_rate = value;
    } else if (parameter == "lambda") {
        config.train.lambda = value;
    } else {
        throw ConfigError("parameter", "unknown sweep parameter '" + parameter + "' (expected mu|nu|pr|lambda)");
    }
    config.validate();
}

void SweepSpec::validate() const {
    if (repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
    if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
    if (variants.empty()) throw ConfigError("variants", "sweep needs at least one variant");
    for (double v : values) {
        ExperimentConfig c = base;
        apply_sweep_value(c, parameter, v);
    }
    for (const auto& v : variants) {
        if (v != "ras") VariantId::parse(v);
    }
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, const std::function<void(const SweepCell&, int)>& progress) {
    spec.validate();
    std::vector<SweepCell> cells;
    for (double value : spec.values) {
        for (const auto& variant : spec.variants) {
            SweepCell cell;
            cell.value = value;
            cell.variant = variant;
            for (int rep = 0; rep < spec.repetitions; ++rep) {
                try {
                    ExperimentConfig c = spec.base;
                    apply_sweep_value(c, spec.parameter, value);
                    c.train.seed = static_cast<std::uint64_t>(rep);
                    const bool ras = variant == "ras";
                    if (!ras) {
                        auto r = c.variant.soft_boundary_r;
                        c.variant = VariantId::parse(variant);
                        if (c.variant.kind == Variant::Cocas && !c.variant.soft_boundary_r) c.variant.soft_boundary_r = r;
                    }
                    const TrialResult t = run_synthetic_trial(c, ras ? Detector::Ras : Detector::Model);
                    cell.f1.push_back(t.outcome.get(spec.metric).f1);
                } catch (const std::exception& e) {
                    cell.errors.push_back("rep " + std::to_string(rep) + ": " + e.what());
                }
                if (progress) progress(cell, rep);
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace roca
