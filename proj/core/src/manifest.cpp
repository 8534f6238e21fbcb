#include "roca/manifest.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#ifndef ROCA_VERSION
#define ROCA_VERSION "unknown"
#endif

namespace roca {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("sha256 initialisation failed");
        }
    }
    void update(const void* data, std::size_t size) {
        if (size && EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw std::runtime_error("sha256 update failed");
    }
    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), digest, &len) != 1) throw std::runtime_error("sha256 final failed");
        std::ostringstream os;
        for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
        return os.str();
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

template <typename T>
void update_pod(Sha256& h, const T& v) {
    h.update(&v, sizeof v);
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
    Sha256 h;
    h.update(data, size);
    return h.hex();
}

std::string sha256_hex(const std::string& text) { return sha256_hex(text.data(), text.size()); }

std::string fingerprint(const RawSeries& series) {
    Sha256 h;
    update_pod(h, series.values.rows());
    update_pod(h, series.values.cols());
    h.update(series.values.data(), sizeof(double) * static_cast<std::size_t>(series.values.size()));
    if (series.labels) h.update(series.labels->data(), series.labels->size());
    return h.hex();
}

std::string fingerprint(const WindowedDataset& ds) {
    Sha256 h;
    update_pod(h, ds.window_length);
    update_pod(h, ds.dim);
    h.update(ds.data.data(), sizeof(double) * static_cast<std::size_t>(ds.data.size()));
    h.update(ds.origin.data(), sizeof(std::int64_t) * ds.origin.size());
    h.update(ds.injected.data(), ds.injected.size());
    if (ds.labels) h.update(ds.labels->data(), ds.labels->size());
    return h.hex();
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string code_version() { return ROCA_VERSION; }

RunManifest make_manifest(const ExperimentConfig& config, std::string dataset_fingerprint) {
    RunManifest m;
    m.config = config;
    m.dataset_fingerprint = std::move(dataset_fingerprint);
    m.code_version = code_version();
    m.seed = config.train.seed;
    m.started_at = utc_timestamp();
    return m;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "roca-manifest/1";
    j["config"] = serialize_config(config);
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["code_version"] = code_version;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["notes"] = notes;
    return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != "roca-manifest/1") throw std::runtime_error("unsupported manifest format");
    RunManifest m;
    m.config = parse_config(j.at("config").get<std::string>());
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.notes = j.at("notes").get<std::map<std::string, std::string>>();
    return m;
}

std::string RunManifest::hash() const {
    RunManifest content = *this;
    content.started_at.clear();
    content.finished_at.clear();
    return sha256_hex(content.to_json()).substr(0, 16);
}

void RunManifest::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << to_json() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace roca
