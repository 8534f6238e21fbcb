#include "roca/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace roca {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

double to_double(std::string_view key, std::string_view text) {
    const std::string s(trim(text));
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("'" + std::string(key) + "' expects a real number, got '" + s + "'", -1);
    }
}

long long to_integer(std::string_view key, std::string_view text) {
    const auto s = trim(text);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("'" + std::string(key) + "' expects an integer, got '" + std::string(s) + "'", -1);
    }
    return v;
}

int to_int(std::string_view key, std::string_view text) {
    const long long v = to_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ParseError("'" + std::string(key) + "' is out of range", -1);
    }
    return static_cast<int>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
    const auto s = trim(text);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ParseError("'" + std::string(key) + "' expects a boolean, got '" + std::string(s) + "'", -1);
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        auto item = trim(text.substr(0, comma));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<double> to_double_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    for (auto item : split_list(text)) out.push_back(to_double(key, item));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += fmt(items[i]);
    }
    return out;
}

Scope to_scope(std::string_view key, std::string_view text) {
    const auto s = trim(text);
    if (s == "batch") return Scope::Batch;
    if (s == "full" || s == "full_set") return Scope::FullSet;
    throw ParseError("'" + std::string(key) + "' expects batch|full, got '" + std::string(s) + "'", -1);
}

std::string scope_name(Scope s) { return s == Scope::Batch ? "batch" : "full"; }

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define ROCA_DOUBLE_FIELD(KEY, MEMBER)                                                   \
    Field {                                                                               \
        KEY, [](const ExperimentConfig& c) { return format_double(c.MEMBER); },           \
            [](ExperimentConfig& c, std::string_view v) { c.MEMBER = to_double(KEY, v); } \
    }
#define ROCA_INT_FIELD(KEY, MEMBER)                                                    \
    Field {                                                                             \
        KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },        \
            [](ExperimentConfig& c, std::string_view v) { c.MEMBER = to_int(KEY, v); } \
    }
#define ROCA_BOOL_FIELD(KEY, MEMBER)                                                    \
    Field {                                                                              \
        KEY, [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }, \
            [](ExperimentConfig& c, std::string_view v) { c.MEMBER = to_bool(KEY, v); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"name", [](const ExperimentConfig& c) { return c.series.name; },
         [](ExperimentConfig& c, std::string_view v) { c.series.name = std::string(trim(v)); }},
        ROCA_INT_FIELD("dim", series.dim),
        ROCA_INT_FIELD("window_length", series.window_length),
        ROCA_INT_FIELD("time_step", series.time_step),
        {"variant", [](const ExperimentConfig& c) { return c.variant.name(); },
         [](ExperimentConfig& c, std::string_view v) {
             auto r = c.variant.soft_boundary_r;
             c.variant = VariantId::parse(v);
             if (c.variant.kind == Variant::Cocas && !c.variant.soft_boundary_r) c.variant.soft_boundary_r = r;
         }},
        {"soft_boundary_r",
         [](const ExperimentConfig& c) {
             return c.variant.soft_boundary_r ? format_double(*c.variant.soft_boundary_r) : std::string("none");
         },
         [](ExperimentConfig& c, std::string_view v) {
             if (trim(v) == "none") {
                 c.variant.soft_boundary_r.reset();
             } else {
                 c.variant.soft_boundary_r = to_double("soft_boundary_r", v);
             }
         }},
        ROCA_DOUBLE_FIELD("nu", train.nu),
        ROCA_DOUBLE_FIELD("mu", train.mu),
        ROCA_DOUBLE_FIELD("lambda", train.lambda),
        ROCA_DOUBLE_FIELD("zeta", train.zeta),
        ROCA_DOUBLE_FIELD("epsilon", train.epsilon),
        ROCA_INT_FIELD("warmup_epochs", train.warmup_epochs),
        {"center_freeze_epoch",
         [](const ExperimentConfig& c) {
             return c.train.center_freeze_epoch ? std::to_string(*c.train.center_freeze_epoch) : std::string("auto");
         },
         [](ExperimentConfig& c, std::string_view v) {
             if (trim(v) == "auto") {
                 c.train.center_freeze_epoch.reset();
             } else {
                 c.train.center_freeze_epoch = to_int("center_freeze_epoch", v);
             }
         }},
        ROCA_INT_FIELD("epochs", train.epochs),
        ROCA_INT_FIELD("batch_size", train.batch_size),
        ROCA_DOUBLE_FIELD("learning_rate", train.learning_rate),
        ROCA_DOUBLE_FIELD("weight_decay", train.weight_decay),
        ROCA_DOUBLE_FIELD("beta1", train.beta1),
        ROCA_DOUBLE_FIELD("beta2", train.beta2),
        ROCA_DOUBLE_FIELD("dropout", train.dropout),
        {"seed", [](const ExperimentConfig& c) { return std::to_string(c.train.seed); },
         [](ExperimentConfig& c, std::string_view v) {
             const long long s = to_integer("seed", v);
             if (s < 0) throw ParseError("'seed' must be non-negative", -1);
             c.train.seed = static_cast<std::uint64_t>(s);
         }},
        {"label_scope", [](const ExperimentConfig& c) { return scope_name(c.train.label_scope); },
         [](ExperimentConfig& c, std::string_view v) { c.train.label_scope = to_scope("label_scope", v); }},
        {"center_scope", [](const ExperimentConfig& c) { return scope_name(c.train.center_scope); },
         [](ExperimentConfig& c, std::string_view v) { c.train.center_scope = to_scope("center_scope", v); }},
        ROCA_BOOL_FIELD("eval_mode_labels", train.eval_mode_labels),
        ROCA_BOOL_FIELD("drop_last", train.drop_last),
        ROCA_BOOL_FIELD("early_stopping", train.early_stopping),
        ROCA_INT_FIELD("patience", train.patience),
        ROCA_DOUBLE_FIELD("validation_fraction", train.validation_fraction),
        ROCA_INT_FIELD("encoder_blocks", model.encoder_blocks),
        ROCA_INT_FIELD("channels", model.channels),
        ROCA_INT_FIELD("kernel_size", model.kernel_size),
        ROCA_INT_FIELD("pool_width", model.pool_width),
        ROCA_INT_FIELD("lstm_layers", model.lstm_layers),
        ROCA_INT_FIELD("projector_hidden", model.projector_hidden),
        ROCA_INT_FIELD("projection_dim", model.projection_dim),
        {"reduction",
         [](const ExperimentConfig& c) {
             return std::string(c.model.reduction == TemporalReduction::Flatten ? "flatten" : "mean");
         },
         [](ExperimentConfig& c, std::string_view v) {
             const auto s = trim(v);
             if (s == "flatten") {
                 c.model.reduction = TemporalReduction::Flatten;
             } else if (s == "mean" || s == "mean_pool") {
                 c.model.reduction = TemporalReduction::MeanPool;
             } else {
                 throw ParseError("'reduction' expects flatten|mean", -1);
             }
         }},
        ROCA_BOOL_FIELD("augment", augmentation.enabled),
        ROCA_DOUBLE_FIELD("jitter_sigma", augmentation.jitter_sigma),
        ROCA_DOUBLE_FIELD("scale_min", augmentation.scale_min),
        ROCA_DOUBLE_FIELD("scale_max", augmentation.scale_max),
        ROCA_INT_FIELD("synthetic_train_length", synthetic.train_length),
        ROCA_INT_FIELD("synthetic_validation_length", synthetic.validation_length),
        ROCA_INT_FIELD("synthetic_test_length", synthetic.test_length),
        {"synthetic_periods",
         [](const ExperimentConfig& c) { return join<double>(c.synthetic.periods, format_double); },
         [](ExperimentConfig& c, std::string_view v) { c.synthetic.periods = to_double_list("synthetic_periods", v); }},
        {"synthetic_amplitudes",
         [](const ExperimentConfig& c) { return join<double>(c.synthetic.amplitudes, format_double); },
         [](ExperimentConfig& c, std::string_view v) {
             c.synthetic.amplitudes = to_double_list("synthetic_amplitudes", v);
         }},
        ROCA_DOUBLE_FIELD("synthetic_noise_sigma", synthetic.noise_sigma),
        ROCA_DOUBLE_FIELD("synthetic_anomaly_rate", synthetic.anomaly_rate),
        {"synthetic_anomaly_kinds",
         [](const ExperimentConfig& c) {
             return join<AnomalyKind>(c.synthetic.anomaly_kinds, [](const AnomalyKind& k) { return to_string(k); });
         },
         [](ExperimentConfig& c, std::string_view v) {
             c.synthetic.anomaly_kinds.clear();
             for (auto item : split_list(v)) c.synthetic.anomaly_kinds.push_back(parse_anomaly_kind(item));
         }},
        ROCA_INT_FIELD("synthetic_pattern_length", synthetic.pattern_length),
        ROCA_DOUBLE_FIELD("pollution_rate", synthetic.train_pollution_rate),
        {"threshold_mode", [](const ExperimentConfig& c) { return to_string(c.eval.threshold_mode); },
         [](ExperimentConfig& c, std::string_view v) { c.eval.threshold_mode = parse_threshold_mode(v); }},
        {"threshold_metric", [](const ExperimentConfig& c) { return to_string(c.eval.threshold_metric); },
         [](ExperimentConfig& c, std::string_view v) { c.eval.threshold_metric = parse_metric_kind(v); }},
        ROCA_DOUBLE_FIELD("pak_k", eval.pak_k),
        ROCA_BOOL_FIELD("top1", eval.top1),
    };
    return table;
}

#undef ROCA_DOUBLE_FIELD
#undef ROCA_INT_FIELD
#undef ROCA_BOOL_FIELD

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

}  // namespace

long round_count(double x) { return std::lround(x); }

void SeriesSpec::validate() const {
    require(!name.empty(), "name", "must not be empty");
    require(dim >= 1, "dim", "must be >= 1");
    require(window_length >= 1, "window_length", "must be >= 1");
    require(time_step >= 1, "time_step", "must be >= 1");
    require(time_step <= window_length, "time_step",
            "must not exceed window_length (" + std::to_string(time_step) + " > " + std::to_string(window_length) + ")");
}

VariantId VariantId::parse(std::string_view text) {
    std::string s(trim(text));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    std::replace(s.begin(), s.end(), '-', '_');
    VariantId id;
    if (s == "roca") {
        id.kind = Variant::Roca;
    } else if (s == "coca") {
        id.kind = Variant::Coca;
    } else if (s.rfind("cocas", 0) == 0) {
        id.kind = Variant::Cocas;
        if (s.size() > 5) {
            if (s[5] != ':') throw ParseError("unknown variant '" + std::string(text) + "'", -1);
            id.soft_boundary_r = to_double("variant", std::string_view(s).substr(6));
        }
    } else if (s == "roca_nov") {
        id.kind = Variant::RocaNoV;
    } else {
        throw ParseError("unknown variant '" + std::string(text) + "' (expected roca|coca|cocas[:r]|roca_nov)", -1);
    }
    return id;
}

std::string VariantId::name() const {
    switch (kind) {
        case Variant::Roca: return "roca";
        case Variant::Coca: return "coca";
        case Variant::Cocas: return "cocas";
        case Variant::RocaNoV: return "roca_nov";
    }
    return "roca";
}

void VariantId::validate() const {
    if (kind == Variant::Cocas) {
        require(soft_boundary_r.has_value(), "soft_boundary_r", "required for the cocas variant");
        require(*soft_boundary_r > 0.0 && *soft_boundary_r <= 1.0, "soft_boundary_r", "must lie in (0, 1]");
    } else {
        require(!soft_boundary_r.has_value(), "soft_boundary_r", "only valid for the cocas variant");
    }
}

void TrainConfig::validate() const {
    require(nu >= 0.0 && nu < 1.0, "nu", "must lie in [0, 1)");
    require(mu >= 0.0, "mu", "must be non-negative");
    require(lambda >= 0.0, "lambda", "must be non-negative");
    require(zeta > 0.0, "zeta", "must be positive");
    require(epsilon > 0.0, "epsilon", "must be positive");
    require(warmup_epochs >= 0, "warmup_epochs", "must be non-negative");
    require(!center_freeze_epoch || *center_freeze_epoch >= 0, "center_freeze_epoch", "must be non-negative");
    require(epochs >= 0, "epochs", "must be non-negative");
    require(batch_size >= 1, "batch_size", "must be >= 1");
    require(learning_rate >= 1e-4 && learning_rate <= 5e-4, "learning_rate", "must lie in [1e-4, 5e-4]");
    require(weight_decay >= 0.0, "weight_decay", "must be non-negative");
    require(beta1 >= 0.0 && beta1 < 1.0, "beta1", "must lie in [0, 1)");
    require(beta2 >= 0.0 && beta2 < 1.0, "beta2", "must lie in [0, 1)");
    require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1)");
    require(patience >= 1, "patience", "must be >= 1");
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation_fraction", "must lie in [0, 1)");
}

void ModelOptions::validate() const {
    require(encoder_blocks >= 1, "encoder_blocks", "must be >= 1");
    require(channels >= 1, "channels", "must be >= 1");
    require(kernel_size >= 1, "kernel_size", "must be >= 1");
    require(pool_width >= 1, "pool_width", "must be >= 1");
    require(lstm_layers >= 1, "lstm_layers", "must be >= 1");
    require(projector_hidden >= 1, "projector_hidden", "must be >= 1");
    require(projection_dim >= 1, "projection_dim", "must be >= 1");
}

void AugmentationParams::validate() const {
    require(jitter_sigma >= 0.0, "jitter_sigma", "must be non-negative");
    require(scale_min > 0.0, "scale_min", "must be positive");
    require(scale_max >= scale_min, "scale_max", "must be >= scale_min");
}

void SyntheticSpec::validate() const {
    require(train_length >= 1, "synthetic_train_length", "must be >= 1");
    require(validation_length >= 0, "synthetic_validation_length", "must be non-negative");
    require(test_length >= 1, "synthetic_test_length", "must be >= 1");
    require(!periods.empty(), "synthetic_periods", "must list at least one period");
    require(periods.size() == amplitudes.size(), "synthetic_amplitudes", "must match synthetic_periods in length");
    for (double p : periods) require(p > 0.0, "synthetic_periods", "periods must be positive");
    require(noise_sigma >= 0.0, "synthetic_noise_sigma", "must be non-negative");
    require(anomaly_rate >= 0.0 && anomaly_rate <= 1.0, "synthetic_anomaly_rate", "must lie in [0, 1]");
    require(!anomaly_kinds.empty(), "synthetic_anomaly_kinds", "must list at least one kind");
    require(pattern_length >= 2, "synthetic_pattern_length", "must be >= 2");
    require(train_pollution_rate >= 0.0, "pollution_rate", "must be non-negative");
}

void ExperimentConfig::validate() const {
    series.validate();
    train.validate();
    variant.validate();
    model.validate();
    augmentation.validate();
    synthetic.validate();
    require(eval.pak_k >= 0.0 && eval.pak_k <= 100.0, "pak_k", "must lie in [0, 100]");
}

std::string to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::PointGlobal: return "point_global";
        case AnomalyKind::PointLocal: return "point_local";
        case AnomalyKind::PatternShapelet: return "pattern_shapelet";
    }
    return "point_global";
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
    const auto s = trim(text);
    if (s == "point_global") return AnomalyKind::PointGlobal;
    if (s == "point_local") return AnomalyKind::PointLocal;
    if (s == "pattern_shapelet") return AnomalyKind::PatternShapelet;
    throw ParseError("unknown anomaly kind '" + std::string(s) + "'", -1);
}

std::string to_string(ThresholdMode mode) {
    switch (mode) {
        case ThresholdMode::Sigma3: return "sigma3";
        case ThresholdMode::Validation: return "validation";
        case ThresholdMode::Test: return "test";
    }
    return "sigma3";
}

ThresholdMode parse_threshold_mode(std::string_view text) {
    const auto s = trim(text);
    if (s == "sigma3") return ThresholdMode::Sigma3;
    if (s == "validation") return ThresholdMode::Validation;
    if (s == "test") return ThresholdMode::Test;
    throw ParseError("unknown threshold mode '" + std::string(s) + "' (expected sigma3|validation|test)", -1);
}

std::string to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::PW: return "pw";
        case MetricKind::PA: return "pa";
        case MetricKind::PAK: return "pak";
        case MetricKind::RPA: return "rpa";
    }
    return "pa";
}

MetricKind parse_metric_kind(std::string_view text) {
    std::string s(trim(text));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "pw") return MetricKind::PW;
    if (s == "pa") return MetricKind::PA;
    if (s == "pak" || s == "pa%k") return MetricKind::PAK;
    if (s == "rpa") return MetricKind::RPA;
    throw ParseError("unknown metric '" + s + "' (expected pw|pa|pak|rpa)", -1);
}

ExperimentConfig profile_defaults(std::string_view profile) {
    ExperimentConfig c;
    c.profile = std::string(profile);
    if (profile == "synthetic") {
        c.series = {"synthetic", 1, 16, 8};
        c.train.nu = 0.002;
        c.train.label_scope = Scope::FullSet;
        c.train.warmup_epochs = 1;
        c.train.epochs = 20;
    } else if (profile == "aiops") {
        c.series = {"aiops", 1, 16, 16};
        c.train.nu = 0.03;
        c.eval.threshold_mode = ThresholdMode::Validation;
    } else if (profile == "ucr") {
        c.series = {"ucr", 1, 64, 16};
        c.train.nu = 0.01;
        c.train.early_stopping = true;
        c.eval.top1 = true;
    } else if (profile == "swat" || profile == "wadi") {
        c.series = {std::string(profile), profile == "swat" ? 51 : 127, 32, 16};
        c.train.nu = 0.001;
        c.train.label_scope = Scope::FullSet;
        c.train.epochs = 100;
        c.model.encoder_blocks = 3;
        c.model.channels = 64;
        c.eval.threshold_mode = ThresholdMode::Validation;
    } else {
        throw ConfigError("profile", "unknown profile '" + std::string(profile) + "'");
    }
    return c;
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto k = trim(key);
    for (const auto& f : fields()) {
        if (f.key == k) {
            f.set(config, value);
            return;
        }
    }
    throw ParseError("unknown configuration key '" + std::string(k) + "'", -1);
}

ExperimentConfig parse_config(std::string_view text) {
    struct Entry {
        std::string key, value;
        int line;
    };
    std::vector<Entry> entries;
    std::string profile = "synthetic";
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
        }
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key", line_no);
        if (key == "profile") {
            profile = std::string(value);
        } else {
            entries.push_back({std::string(key), std::string(value), line_no});
        }
    }
    ExperimentConfig config = profile_defaults(profile);
    for (const auto& e : entries) {
        try {
            set_config_value(config, e.key, e.value);
        } catch (const ParseError& err) {
            throw ParseError("line " + std::to_string(e.line) + ": " + err.what(), e.line);
        }
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open configuration file '" + path.string() + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream os;
    os << "profile = " << config.profile << "\n";
    for (const auto& f : fields()) os << f.key << " = " << f.get(config) << "\n";
    return os.str();
}

}  // namespace roca
