// roca: command-line front end for preparing data, training, evaluating,
// sweeping hyperparameters and summarizing result tables.
//
// Exit status: 0 success, 2 usage or configuration error, 3 data error,
// 4 training aborted, 1 anything else.

#include "roca/benchmark_loader.hpp"
#include "roca/checkpoint.hpp"
#include "roca/config.hpp"
#include "roca/harness.hpp"
#include "roca/manifest.hpp"
#include "roca/table_io.hpp"
#include "roca/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace roca;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kAbort = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "roca-out";
    std::string profile;
    std::vector<std::string> overrides;
    bool quiet = false;
};

void log(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << "[roca] " << msg << '\n';
}

std::vector<std::string> split(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "0-9" or "0,3,5"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split(text)) {
        const auto dash = part.find('-');
        try {
            if (dash == std::string::npos) {
                seeds.push_back(std::stoull(part));
            } else {
                const auto lo = std::stoull(part.substr(0, dash));
                const auto hi = std::stoull(part.substr(dash + 1));
                if (hi < lo) throw UsageError("seed range '" + part + "' is descending");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse seeds '" + text + "'");
        }
    }
    if (seeds.empty()) throw UsageError("no seeds given");
    return seeds;
}

// "4.5,5,5.5" or "4.5:8:0.5" (inclusive)
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    try {
        const auto parts = split(text, ':');
        if (parts.size() == 3) {
            const double lo = std::stod(parts[0]), hi = std::stod(parts[1]), step = std::stod(parts[2]);
            if (!(step > 0.0) || hi < lo) throw UsageError("bad value range '" + text + "'");
            const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
            for (long i = 0; i <= n; ++i) values.push_back(lo + static_cast<double>(i) * step);
        } else {
            for (const auto& v : split(text)) values.push_back(std::stod(v));
        }
    } catch (const std::logic_error&) {
        throw UsageError("cannot parse values '" + text + "'");
    }
    if (values.empty()) throw UsageError("no values given");
    return values;
}

ExperimentConfig build_config(const Globals& g) {
    ExperimentConfig c;
    if (!g.config_path.empty()) {
        c = load_config(g.config_path);
        if (!g.profile.empty() && c.profile != g.profile) {
            throw UsageError("--profile " + g.profile + " conflicts with profile '" + c.profile + "' in " +
                             g.config_path);
        }
    } else {
        c = profile_defaults(g.profile.empty() ? "synthetic" : g.profile);
    }
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) c.train.seed = *g.seed;
    c.validate();
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out << text;
    }
    fs::rename(tmp, path);
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(path, os.str());
}

// ---- prepare ---------------------------------------------------------------

struct Splits {
    std::string dataset;
    std::string subset;
    RawSeries train;
    std::optional<RawSeries> validation;
    RawSeries test;
};

std::string splits_fingerprint(const Splits& s) {
    std::string text = fingerprint(s.train) + fingerprint(s.test);
    if (s.validation) text += fingerprint(*s.validation);
    return sha256_hex(text);
}

Splits read_splits(const fs::path& dir) {
    const fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) {
        throw DataError("'" + dir.string() + "' is not a prepared subset (no manifest.json); run `roca prepare` first");
    }
    const RunManifest m = RunManifest::load(manifest);
    Splits s;
    s.dataset = m.notes.count("dataset") ? m.notes.at("dataset") : m.config.profile;
    s.subset = m.notes.count("subset") ? m.notes.at("subset") : dir.filename().string();
    s.train = read_series_csv(dir / "train.csv");
    if (fs::exists(dir / "validation.csv")) s.validation = read_series_csv(dir / "validation.csv");
    s.test = read_series_csv(dir / "test.csv");
    return s;
}

// A prepared subset directory, or a directory of them (sorted).
std::vector<fs::path> subset_dirs(const fs::path& root) {
    if (fs::exists(root / "manifest.json")) return {root};
    std::vector<fs::path> dirs;
    if (fs::is_directory(root)) {
        for (const auto& e : fs::directory_iterator(root)) {
            if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw DataError("no prepared subsets under '" + root.string() + "'; run `roca prepare` first");
    return dirs;
}

int cmd_prepare(const Globals& g, const std::string& dataset_opt, const std::string& root) {
    const ExperimentConfig c = build_config(g);
    const std::string dataset = dataset_opt.empty() ? c.profile : dataset_opt;
    std::vector<Splits> all;
    if (dataset == "synthetic") {
        const SyntheticSeries syn = generate_synthetic(c.synthetic, c.series, c.train.seed);
        Splits s{"synthetic", "synthetic", syn.train, std::nullopt, syn.test};
        if (syn.validation.length() > 0) s.validation = syn.validation;
        all.push_back(std::move(s));
    } else {
        if (root.empty()) throw UsageError("prepare --dataset " + dataset + " needs --root");
        for (auto& b : load_benchmark(dataset, root)) {
            all.push_back(Splits{dataset, b.name, std::move(b.train), std::nullopt, std::move(b.test)});
        }
    }
    for (const auto& s : all) {
        const fs::path dir = fs::path(g.out) / "data" / dataset / s.subset;
        RunManifest m = make_manifest(c, splits_fingerprint(s));
        m.notes["dataset"] = s.dataset;
        m.notes["subset"] = s.subset;
        const PreparedData d = prepare_splits(s.dataset, s.subset, s.train, s.validation, s.test, c);
        m.notes["train_windows"] = std::to_string(d.train.size());
        m.notes["test_windows"] = std::to_string(d.test.windows.size());
        if (fs::exists(dir / "manifest.json")) {
            try {
                if (RunManifest::load(dir / "manifest.json").hash() == m.hash()) {
                    log(g, s.subset + ": up to date (" + m.hash() + ")");
                    continue;
                }
            } catch (const std::exception&) {
                // unreadable manifest: rewrite
            }
        }
        fs::create_directories(dir);
        write_series_csv(dir / "train.csv", s.train);
        if (s.validation) write_series_csv(dir / "validation.csv", *s.validation);
        else fs::remove(dir / "validation.csv");
        write_series_csv(dir / "test.csv", s.test);
        write_index_list(dir / "contamination.idx", d.contamination_mask);
        m.finished_at = utc_timestamp();
        m.save(dir / "manifest.json");
        std::cout << dir.string() << ' ' << m.hash() << '\n';
    }
    return kOk;
}

// ---- train -----------------------------------------------------------------

constexpr const char* kRasFormat = "roca-ras/1";

fs::path run_dir(const Globals& g, const std::string& subset, const std::string& variant, std::uint64_t seed) {
    return fs::path(g.out) / "runs" / subset / variant / ("seed" + std::to_string(seed));
}

void write_epochs(std::ostream& out, const TrainState& st) {
    out << "epoch,mean_loss,mean_l_inv,sim_q_ce,sim_qp_ce,sim_q_qp,bound_tightness,validation_l_inv\n";
    out << std::setprecision(10);
    for (const auto& e : st.history) {
        out << e.epoch << ',' << e.mean_loss << ',' << e.mean_l_inv << ',' << e.sim_q_ce << ',' << e.sim_qp_ce << ','
            << e.sim_q_qp << ',' << e.bound_tightness << ',';
        if (e.validation_l_inv) out << *e.validation_l_inv;
        out << '\n';
    }
}

int cmd_train(const Globals& g, const std::string& data, const std::string& variants_opt,
              const std::string& seeds_opt) {
    const ExperimentConfig base = build_config(g);
    std::vector<std::string> variants = variants_opt.empty() ? std::vector<std::string>{base.variant.name()}
                                                             : split(variants_opt);
    for (const auto& v : variants) {
        if (v != "ras") VariantId::parse(v);
    }
    const auto seeds = seeds_opt.empty() ? std::vector<std::uint64_t>{base.train.seed} : parse_seeds(seeds_opt);

    for (const auto& dir : subset_dirs(data)) {
        const Splits s = read_splits(dir);
        const std::string data_hash = RunManifest::load(dir / "manifest.json").hash();
        for (const auto& variant : variants) {
            for (auto seed : seeds) {
                ExperimentConfig c = base;
                c.train.seed = seed;
                if (variant != "ras") {
                    const auto r = c.variant.soft_boundary_r;
                    c.variant = VariantId::parse(variant);
                    if (c.variant.kind == Variant::Cocas && !c.variant.soft_boundary_r) c.variant.soft_boundary_r = r;
                }
                const PreparedData d = prepare_splits(s.dataset, s.subset, s.train, s.validation, s.test, c);
                const fs::path out = run_dir(g, s.subset, variant, seed);
                fs::create_directories(out);
                RunManifest m = make_manifest(c, d.fingerprint);
                m.notes["dataset"] = s.dataset;
                m.notes["subset"] = s.subset;
                m.notes["variant"] = variant;
                m.notes["data_manifest"] = data_hash;

                if (variant == "ras") {
                    nlohmann::ordered_json j;
                    j["format"] = kRasFormat;
                    j["seed"] = seed;
                    write_text(out / "checkpoint.json", j.dump(2) + "\n");
                    m.finished_at = utc_timestamp();
                    m.save(out / "manifest.json");
                    std::cout << (out / "checkpoint.json").string() << ' ' << m.hash() << '\n';
                    continue;
                }

                Rng init = make_rng(seed, Stream::Init);
                RocaModel model(EncoderSpec::from_config(c), init);
                log(g, s.subset + " " + variant + " seed " + std::to_string(seed) + ": " +
                           std::to_string(d.train.size()) + " training windows, " + std::to_string(c.train.epochs) +
                           " epochs");
                TrainState st;
                try {
                    st = fit(model, d.train, c, d.validation ? &d.validation->windows : nullptr);
                } catch (const TrainingAborted& e) {
                    save_checkpoint(out / "checkpoint.partial.json", model);
                    m.notes["abort"] = std::string(e.what()) + " (epoch " + std::to_string(e.epoch()) + ", batch " +
                                       std::to_string(e.batch()) + ")";
                    m.finished_at = utc_timestamp();
                    m.save(out / "manifest.json");
                    std::cerr << "roca: training aborted: " << m.notes["abort"] << '\n';
                    return kAbort;
                }
                save_checkpoint(out / "checkpoint.json", model);
                write_with(out / "epochs.csv", [&](std::ostream& os) { write_epochs(os, st); });
                write_with(out / "batches.csv", [&](std::ostream& os) { write_batch_log(os, st); });
                write_with(out / "labels.txt", [&](std::ostream& os) { write_label_log(os, st); });
                m.notes["epochs_run"] = std::to_string(st.epoch);
                if (st.early_stop_epoch) m.notes["early_stop_epoch"] = std::to_string(*st.early_stop_epoch);
                if (st.best_epoch) m.notes["best_epoch"] = std::to_string(*st.best_epoch);
                m.finished_at = utc_timestamp();
                m.save(out / "manifest.json");
                std::cout << (out / "checkpoint.json").string() << ' ' << m.hash() << '\n';
            }
        }
    }
    return kOk;
}

// ---- eval ------------------------------------------------------------------

std::vector<fs::path> find_checkpoints(const std::vector<std::string>& given, const std::string& runs) {
    std::vector<fs::path> out(given.begin(), given.end());
    if (!runs.empty()) {
        if (!fs::is_directory(runs)) throw DataError("'" + runs + "' is not a directory");
        for (const auto& e : fs::recursive_directory_iterator(runs)) {
            if (e.is_regular_file() && e.path().filename() == "checkpoint.json") out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw UsageError("eval needs --checkpoint or --runs");
    return out;
}

std::vector<MetricKind> parse_metrics(const std::string& text) {
    std::vector<MetricKind> out;
    for (const auto& m : split(text)) {
        try {
            out.push_back(parse_metric_kind(m));
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }
    if (out.empty()) throw UsageError("no metrics given");
    return out;
}

bool is_ras(const std::string& text) {
    try {
        return nlohmann::json::parse(text).value("format", "") == kRasFormat;
    } catch (const nlohmann::json::exception&) {
        return false;
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cmd_eval(const Globals& g, const std::vector<std::string>& checkpoints, const std::string& runs,
             const std::string& data, const std::string& metrics_opt, bool write_scores_files) {
    const auto metrics = parse_metrics(metrics_opt);
    const auto paths = find_checkpoints(checkpoints, runs);
    const fs::path out = fs::path(g.out) / "eval";
    std::vector<ResultRow> rows;

    for (const auto& ckpt : paths) {
        const fs::path sidecar = ckpt.parent_path() / "manifest.json";
        if (!fs::exists(sidecar)) throw DataError("checkpoint '" + ckpt.string() + "' has no manifest.json sidecar");
        const RunManifest train_m = RunManifest::load(sidecar);
        ExperimentConfig c = train_m.config;
        for (const auto& kv : g.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
            set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        c.validate();
        const std::string subset = train_m.notes.count("subset") ? train_m.notes.at("subset") : "";
        fs::path subset_dir = data;
        if (!fs::exists(subset_dir / "manifest.json")) subset_dir /= subset;
        const Splits s = read_splits(subset_dir);
        if (s.subset != subset) {
            throw DataError("checkpoint '" + ckpt.string() + "' was trained on subset '" + subset + "', not '" +
                            s.subset + "'");
        }
        const PreparedData d = prepare_splits(s.dataset, s.subset, s.train, s.validation, s.test, c);

        const std::string text = slurp(ckpt);
        TrialResult t;
        if (is_ras(text)) {
            t = run_ras(d, c);
        } else {
            RocaModel model = checkpoint_from_json(text);
            const EncoderSpec& spec = model.spec();
            if (spec.input_dim != s.test.dim() || spec.window_length != c.series.window_length) {
                throw DataError("profile mismatch: checkpoint expects dim " + std::to_string(spec.input_dim) +
                                ", window " + std::to_string(spec.window_length) + " but data has dim " +
                                std::to_string(s.test.dim()) + ", window " + std::to_string(c.series.window_length));
            }
            t = evaluate_model(model, d, c);
        }
        for (const auto& w : t.threshold.warnings) log(g, ckpt.string() + ": " + w);

        RunManifest m = make_manifest(c, d.fingerprint);
        m.notes["checkpoint"] = sha256_hex(text);
        m.notes["train_manifest"] = train_m.hash();
        m.notes["subset"] = s.subset;
        m.notes["tau"] = std::to_string(t.threshold.tau);
        t.manifest_hash = m.hash();
        t.variant = train_m.notes.count("variant") ? train_m.notes.at("variant") : t.variant;
        m.finished_at = utc_timestamp();
        fs::create_directories(out / "manifests");
        m.save(out / "manifests" / (t.manifest_hash + ".json"));

        for (auto& r : result_rows(t, d, c)) {
            const bool wanted = std::any_of(metrics.begin(), metrics.end(),
                                            [&](MetricKind k) { return metric_label(k, c.eval.pak_k) == r.metric; });
            if (wanted) rows.push_back(std::move(r));
        }
        if (write_scores_files) {
            write_with(out / "scores" / (s.subset + "_" + t.variant + "_seed" + std::to_string(t.seed) + ".csv"),
                       [&](std::ostream& os) { write_scores(os, t.test_scores); });
        }
    }

    write_with(out / "results.csv", [&](std::ostream& os) { write_results(os, rows); });
    write_with(out / "summary.txt", [&](std::ostream& os) { write_summary(os, rows); });
    write_summary(std::cout, rows);
    return kOk;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const Globals& g, const std::string& parameter, const std::string& values, int repetitions,
              const std::string& variants, const std::string& metric, int jobs) {
    SweepSpec spec;
    spec.base = build_config(g);
    spec.parameter = parameter;
    spec.values = parse_values(values);
    spec.repetitions = repetitions;
    spec.variants = split(variants);
    try {
        spec.metric = parse_metric_kind(metric);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    spec.validate();

    struct Job {
        double value;
        std::string variant;
    };
    std::vector<Job> work;
    for (double v : spec.values) {
        for (const auto& var : spec.variants) work.push_back({v, var});
    }
    std::vector<SweepCell> cells(work.size());
    std::mutex io;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(io);
                if (next >= work.size()) return;
                i = next++;
            }
            SweepSpec one = spec;
            one.values = {work[i].value};
            one.variants = {work[i].variant};
            cells[i] = run_sweep(one, [&](const SweepCell& cell, int rep) {
                std::lock_guard lock(io);
                log(g, parameter + "=" + std::to_string(cell.value) + " " + cell.variant + " rep " +
                           std::to_string(rep + 1) + "/" + std::to_string(spec.repetitions));
            }).front();
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const fs::path out = fs::path(g.out) / "sweep" / parameter;
    const std::string mlabel = metric_label(spec.metric, spec.base.eval.pak_k);
    write_with(out / "cells.csv", [&](std::ostream& os) {
        os << "parameter,value,variant,rep,metric,f1\n" << std::setprecision(17);
        for (const auto& c : cells) {
            for (std::size_t r = 0; r < c.f1.size(); ++r) {
                os << parameter << ',' << c.value << ',' << c.variant << ',' << r << ',' << mlabel << ',' << c.f1[r]
                   << '\n';
            }
        }
    });
    write_with(out / "box.csv", [&](std::ostream& os) {
        os << "parameter,value,variant,n,min,q1,median,q3,max,outliers\n" << std::setprecision(10);
        for (const auto& c : cells) {
            if (c.f1.empty()) continue;
            const BoxStats b = box_stats(c.f1);
            os << parameter << ',' << c.value << ',' << c.variant << ',' << c.f1.size() << ',' << b.min << ','
               << b.q1 << ',' << b.median << ',' << b.q3 << ',' << b.max << ',';
            for (std::size_t i = 0; i < b.outliers.size(); ++i) os << (i ? ";" : "") << b.outliers[i];
            os << '\n';
        }
    });
    write_with(out / "line.csv", [&](std::ostream& os) {
        os << "parameter,value,variant,n,mean,std\n" << std::setprecision(10);
        for (const auto& c : cells) {
            const MeanStd ms = mean_std(c.f1);
            os << parameter << ',' << c.value << ',' << c.variant << ',' << c.f1.size() << ',' << ms.mean << ','
               << ms.stddev << '\n';
        }
    });
    std::size_t failures = 0;
    write_with(out / "errors.txt", [&](std::ostream& os) {
        for (const auto& c : cells) {
            for (const auto& e : c.errors) {
                os << parameter << '=' << c.value << ' ' << c.variant << ": " << e << '\n';
                ++failures;
            }
        }
    });
    RunManifest m = make_manifest(spec.base, "");
    m.notes["sweep_parameter"] = parameter;
    m.notes["sweep_values"] = values;
    m.notes["sweep_variants"] = variants;
    m.notes["repetitions"] = std::to_string(repetitions);
    m.finished_at = utc_timestamp();
    m.save(out / "manifest.json");

    std::cout << "value      variant     F1 (mean±std, %)   n\n";
    for (const auto& c : cells) {
        std::cout << std::left << std::setw(11) << c.value << std::setw(12) << c.variant << std::setw(19)
                  << format_mean_std(mean_std(c.f1)) << c.f1.size() << '\n';
    }
    if (failures) std::cerr << "roca: " << failures << " repetition(s) failed; see " << (out / "errors.txt") << '\n';
    return kOk;
}

// ---- report ----------------------------------------------------------------

int cmd_report(const Globals& g, const std::vector<std::string>& inputs) {
    std::vector<ResultRow> rows;
    for (const auto& p : inputs) {
        std::ifstream in(p);
        if (!in) throw DataError("cannot open '" + p + "'");
        try {
            auto part = read_results(in);
            rows.insert(rows.end(), part.begin(), part.end());
        } catch (const std::exception& e) {
            throw DataError(p + ": " + e.what());
        }
    }
    write_with(fs::path(g.out) / "report" / "summary.txt", [&](std::ostream& os) { write_summary(os, rows); });
    write_summary(std::cout, rows);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RoCA time-series anomaly detection toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for every derived random stream");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--profile", g.profile, "Dataset profile: synthetic, aiops, ucr, swat, wadi");
    app.add_option("--set", g.overrides, "Override a configuration key (key=value), repeatable");
    app.add_flag("-q,--quiet", g.quiet, "Suppress progress messages");

    std::string dataset, root;
    auto* prepare = app.add_subcommand("prepare", "Generate or load a dataset and write prepared splits");
    prepare->add_option("--dataset", dataset, "synthetic | aiops | ucr | swat | wadi (default: profile)");
    prepare->add_option("--root", root, "Benchmark root directory");

    std::string data, variants, seeds;
    auto* train = app.add_subcommand("train", "Train checkpoints on prepared data");
    train->add_option("--data", data, "Prepared subset directory or a directory of them")->required();
    train->add_option("--variant,--variants", variants, "Comma list: roca, coca, cocas[:r], roca_nov, ras");
    train->add_option("--seeds", seeds, "Seeds, e.g. 0-9 or 0,1,2 (default: --seed)");

    std::vector<std::string> checkpoints;
    std::string runs, metrics = "pw,pa,pak,rpa";
    bool scores = false;
    auto* eval = app.add_subcommand("eval", "Evaluate checkpoints and write a results table");
    eval->add_option("--checkpoint", checkpoints, "Checkpoint file(s)");
    eval->add_option("--runs", runs, "Directory searched recursively for checkpoint.json");
    eval->add_option("--data", data, "Prepared data directory")->required();
    eval->add_option("--metrics", metrics, "Comma list of pw, pa, pak, rpa")->capture_default_str();
    eval->add_flag("--scores", scores, "Also write per-window scores");

    std::string parameter, values, metric = "rpa";
    std::string sweep_variants = "roca";
    int repetitions = 10, jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Sensitivity or robustness sweep on synthetic data");
    sweep->add_option("--parameter", parameter, "mu | nu | pr | lambda")->required();
    sweep->add_option("--values", values, "Comma list or lo:hi:step")->required();
    sweep->add_option("--repetitions", repetitions, "Seeds 0..n-1 per cell")->capture_default_str();
    sweep->add_option("--variants", sweep_variants, "Comma list of variants (ras allowed)")->capture_default_str();
    sweep->add_option("--metric", metric, "Metric for the F1 series")->capture_default_str();
    sweep->add_option("--jobs", jobs, "Parallel cells")->capture_default_str()->check(CLI::PositiveNumber);

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "Summarize results tables as mean±std over seeds");
    report->add_option("results", inputs, "results.csv files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*prepare) return cmd_prepare(g, dataset, root);
        if (*train) return cmd_train(g, data, variants, seeds);
        if (*eval) return cmd_eval(g, checkpoints, runs, data, metrics, scores);
        if (*sweep) return cmd_sweep(g, parameter, values, repetitions, sweep_variants, metric, jobs);
        if (*report) return cmd_report(g, inputs);
    } catch (const UsageError& e) {
        std::cerr << "roca: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "roca: configuration: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "roca: configuration: " << e.what() << '\n';
        return kUsage;
    } catch (const TrainingAborted& e) {
        std::cerr << "roca: training aborted: " << e.what() << '\n';
        return kAbort;
    } catch (const DataError& e) {
        std::cerr << "roca: data: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "roca: data: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "roca: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
