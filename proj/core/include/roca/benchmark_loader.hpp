#pragma once

// Loaders for the public benchmark layouts. See docs/formats.md.
//
//   aiops: <root>/train/<kpi>.csv and <root>/test/<kpi>.csv
//          columns timestamp,value,label
//   ucr:   <root>/NNN_UCR_Anomaly_<name>_<trainEnd>_<begin>_<end>.txt
//          one value per line (or whitespace separated)
//   swat, wadi: <root>/train.csv and <root>/test.csv
//          header row; numeric feature columns; last column is the label
//          (0/1, or Normal/Attack); a leading Timestamp column is skipped

#include "roca/config.hpp"
#include "roca/data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace roca {

struct BenchmarkSubset {
    std::string name;
    RawSeries train;
    RawSeries test;
    SeriesSpec spec;
};

std::vector<BenchmarkSubset> load_benchmark(const std::string& name, const std::filesystem::path& root);

/// Human-readable description of the expected directory layout.
std::string expected_layout(const std::string& name);

}  // namespace roca
