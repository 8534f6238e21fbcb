#include "roca/benchmark_loader.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;

namespace roca {

namespace {

[[noreturn]] void layout_error(const std::string& name, const fs::path& root, const std::string& what) {
    throw DataError(name + " at '" + root.string() + "': " + what + "\nexpected layout:\n" + expected_layout(name));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trimmed(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::uint8_t parse_label(const std::string& raw) {
    std::string s = trimmed(raw);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "0" || s == "normal" || s == "0.0" || s.empty()) return 0;
    return 1;
}

/// Header row, feature columns, trailing label column; a timestamp-like
/// first column is skipped.
RawSeries read_table_with_label(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    auto header = split(line, ',');
    if (header.size() < 2) throw DataError("'" + path.string() + "': need at least one feature and a label column");
    std::string first = trimmed(header.front());
    std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::size_t skip = (first == "timestamp" || first == "time" || first == "date") ? 1 : 0;
    const std::size_t dim = header.size() - 1 - skip;
    if (dim == 0) throw DataError("'" + path.string() + "': no feature columns");

    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    std::vector<double> last(dim, 0.0);
    std::vector<bool> seen(dim, false);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw DataError("'" + path.string() + "' row " + std::to_string(rows + 1) + ": column count mismatch");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            const std::string cell = trimmed(cells[c + skip]);
            char* end = nullptr;
            double v = cell.empty() ? 0.0 : std::strtod(cell.c_str(), &end);
            if (cell.empty() || end == cell.c_str() || !std::isfinite(v)) {
                if (!seen[c]) throw DataError("'" + path.string() + "': leading missing value in column " + std::to_string(c));
                v = last[c];
            }
            last[c] = v;
            seen[c] = true;
            values.push_back(v);
        }
        labels.push_back(parse_label(cells.back()));
        ++rows;
    }
    RawSeries s;
    s.values = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    s.labels = std::move(labels);
    return s;
}

std::vector<BenchmarkSubset> load_aiops(const fs::path& root) {
    const fs::path train_dir = root / "train";
    const fs::path test_dir = root / "test";
    if (!fs::is_directory(train_dir) || !fs::is_directory(test_dir)) layout_error("aiops", root, "missing train/ or test/");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(train_dir)) {
        if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    if (files.empty()) layout_error("aiops", root, "train/ holds no .csv files");
    std::sort(files.begin(), files.end());
    std::vector<BenchmarkSubset> out;
    for (const auto& f : files) {
        const fs::path test = test_dir / f.filename();
        if (!fs::exists(test)) layout_error("aiops", root, "no test file for " + f.filename().string());
        BenchmarkSubset s;
        s.name = f.stem().string();
        s.train = read_series_csv(f, true);
        s.test = read_series_csv(test, true);
        s.spec = {s.name, 1, 16, 16};
        out.push_back(std::move(s));
    }
    return out;
}

RawSeries read_ucr_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || !std::isfinite(x)) throw DataError("'" + path.string() + "': bad value '" + tok + "'");
        v.push_back(x);
    }
    RawSeries s;
    s.values = Eigen::Map<Matrix>(v.data(), static_cast<Eigen::Index>(v.size()), 1);
    return s;
}

std::vector<BenchmarkSubset> load_ucr(const fs::path& root) {
    if (!fs::is_directory(root)) layout_error("ucr", root, "directory not found");
    static const std::regex pattern(R"((\d+)_UCR_Anomaly_(.+)_(\d+)_(\d+)_(\d+)\.txt)");
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(root)) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<BenchmarkSubset> out;
    for (const auto& p : paths) {
        const std::string fname = p.filename().string();
        std::smatch m;
        if (!std::regex_match(fname, m, pattern)) continue;
        const long train_end = std::stol(m[3]);
        const long begin = std::stol(m[4]);
        const long end = std::stol(m[5]);
        RawSeries all = read_ucr_values(p);
        const long T = static_cast<long>(all.length());
        if (train_end <= 0 || train_end >= T || begin < 1 || end < begin || end > T) {
            throw DataError("'" + fname + "': split or anomaly range outside the series");
        }
        BenchmarkSubset s;
        s.name = m[1].str() + "_" + m[2].str();
        s.train.values = all.values.topRows(train_end);
        s.train.labels.emplace(static_cast<std::size_t>(train_end), 0);
        s.test.values = all.values.bottomRows(T - train_end);
        s.test.labels.emplace(static_cast<std::size_t>(T - train_end), 0);
        // archive indices are 1-based and inclusive
        for (long t = begin - 1; t < end; ++t) {
            if (t >= train_end) (*s.test.labels)[static_cast<std::size_t>(t - train_end)] = 1;
        }
        s.spec = {s.name, 1, 64, 16};
        out.push_back(std::move(s));
    }
    if (out.empty()) layout_error("ucr", root, "no files match NNN_UCR_Anomaly_<name>_<trainEnd>_<begin>_<end>.txt");
    return out;
}

std::vector<BenchmarkSubset> load_single_table(const std::string& name, const fs::path& root) {
    const fs::path train = root / "train.csv";
    const fs::path test = root / "test.csv";
    if (!fs::exists(train) || !fs::exists(test)) layout_error(name, root, "missing train.csv or test.csv");
    BenchmarkSubset s;
    s.name = name;
    s.train = read_table_with_label(train);
    s.test = read_table_with_label(test);
    if (s.train.dim() != s.test.dim()) layout_error(name, root, "train and test feature counts differ");
    s.spec = {name, static_cast<int>(s.train.dim()), 32, 16};
    return {std::move(s)};
}

}  // namespace

std::string expected_layout(const std::string& name) {
    if (name == "aiops") {
        return "  <root>/train/<kpi>.csv  (timestamp,value,label)\n"
               "  <root>/test/<kpi>.csv   (same file names as train/)\n";
    }
    if (name == "ucr") return "  <root>/NNN_UCR_Anomaly_<name>_<trainEnd>_<begin>_<end>.txt  (one value per line)\n";
    if (name == "swat" || name == "wadi") {
        return "  <root>/train.csv  (header; [Timestamp,] features..., label)\n"
               "  <root>/test.csv   (same columns)\n";
    }
    return "  unsupported benchmark; expected one of aiops, ucr, swat, wadi\n";
}

std::vector<BenchmarkSubset> load_benchmark(const std::string& name, const fs::path& root) {
    if (name == "aiops") return load_aiops(root);
    if (name == "ucr") return load_ucr(root);
    if (name == "swat" || name == "wadi") return load_single_table(name, root);
    throw DataError("unknown benchmark '" + name + "' (expected aiops, ucr, swat or wadi)");
}

}  // namespace roca
