#pragma once

// Versioned JSON checkpoints: encoder spec, parameters and normalization
// buffers keyed by module path, and the frozen center. Loading needs no
// configuration file. See docs/formats.md.

#include "roca/model.hpp"

#include <filesystem>
#include <string>

namespace roca {

inline constexpr const char* kCheckpointFormat = "roca-checkpoint/1";

std::string checkpoint_to_json(const RocaModel& model);
RocaModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const RocaModel& model);
RocaModel load_checkpoint(const std::filesystem::path& path);

}  // namespace roca
