#pragma once

// Provenance sidecar written next to every results table and checkpoint.

#include "roca/config.hpp"
#include "roca/data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace roca {

struct RunManifest {
    ExperimentConfig config;
    std::string dataset_fingerprint;
    std::string code_version;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::map<std::string, std::string> notes;  // e.g. early-stop epoch, abort reason

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
    /// Short content hash of the manifest (timestamps excluded), carried by
    /// result rows.
    std::string hash() const;

    void save(const std::filesystem::path& path) const;
    static RunManifest load(const std::filesystem::path& path);

    bool operator==(const RunManifest&) const = default;
};

RunManifest make_manifest(const ExperimentConfig& config, std::string dataset_fingerprint);

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string fingerprint(const RawSeries& series);
std::string fingerprint(const WindowedDataset& ds);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

std::string code_version();

}  // namespace roca
