#include "roca/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace roca {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from(const json& j, const std::string& name) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::runtime_error("checkpoint entry '" + name + "' has inconsistent size");
    }
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

json spec_json(const EncoderSpec& s) {
    return {{"input_dim", s.input_dim},
            {"window_length", s.window_length},
            {"blocks", s.blocks},
            {"channels", s.channels},
            {"kernel", s.kernel},
            {"pool", s.pool},
            {"dropout", s.dropout},
            {"lstm_layers", s.lstm_layers},
            {"projector_hidden", s.projector_hidden},
            {"projection_dim", s.projection_dim},
            {"reduction", s.reduction == TemporalReduction::Flatten ? "flatten" : "mean"}};
}

EncoderSpec spec_from(const json& j) {
    EncoderSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.window_length = j.at("window_length").get<int>();
    s.blocks = j.at("blocks").get<int>();
    s.channels = j.at("channels").get<int>();
    s.kernel = j.at("kernel").get<int>();
    s.pool = j.at("pool").get<int>();
    s.dropout = j.at("dropout").get<double>();
    s.lstm_layers = j.at("lstm_layers").get<int>();
    s.projector_hidden = j.at("projector_hidden").get<int>();
    s.projection_dim = j.at("projection_dim").get<int>();
    s.reduction = j.at("reduction").get<std::string>() == "flatten" ? TemporalReduction::Flatten
                                                                    : TemporalReduction::MeanPool;
    return s;
}

}  // namespace

std::string checkpoint_to_json(const RocaModel& model) {
    nlohmann::ordered_json j;
    j["format"] = kCheckpointFormat;
    j["encoder_spec"] = spec_json(model.spec());
    j["center"] = model.center() ? json(std::vector<double>(model.center()->data(),
                                                             model.center()->data() + model.center()->size()))
                                 : json(nullptr);
    json params = json::object();
    for (const auto& p : model.registry().parameters()) params[p.name] = matrix_json(p.var.value());
    j["parameters"] = params;
    json buffers = json::object();
    for (const auto& b : model.registry().buffers()) buffers[b.name] = matrix_json(*b.value);
    j["buffers"] = buffers;
    return j.dump();
}

RocaModel checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    const auto format = j.value("format", "");
    if (format != kCheckpointFormat) throw std::runtime_error("unsupported checkpoint format '" + format + "'");
    Rng rng(0);
    RocaModel model(spec_from(j.at("encoder_spec")), rng);
    const auto& params = j.at("parameters");
    for (const auto& p : model.registry().parameters()) {
        if (!params.contains(p.name)) throw std::runtime_error("checkpoint lacks parameter '" + p.name + "'");
        Matrix m = matrix_from(params.at(p.name), p.name);
        if (m.rows() != p.var.rows() || m.cols() != p.var.cols()) {
            throw std::runtime_error("checkpoint parameter '" + p.name + "' has the wrong shape");
        }
        Var v = p.var;
        v.mutable_value() = m;
    }
    const auto& buffers = j.at("buffers");
    for (const auto& b : model.registry().buffers()) {
        if (!buffers.contains(b.name)) throw std::runtime_error("checkpoint lacks buffer '" + b.name + "'");
        Matrix m = matrix_from(buffers.at(b.name), b.name);
        if (m.rows() != 1 || m.cols() != b.value->size()) {
            throw std::runtime_error("checkpoint buffer '" + b.name + "' has the wrong shape");
        }
        *b.value = m;
    }
    if (!j.at("center").is_null()) {
        const auto c = j.at("center").get<std::vector<double>>();
        model.set_center(Eigen::Map<const RowVector>(c.data(), static_cast<Eigen::Index>(c.size())));
    }
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const RocaModel& model) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << checkpoint_to_json(model);
    }
    std::filesystem::rename(tmp, path);
}

RocaModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

}  // namespace roca
