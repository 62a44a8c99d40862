#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cprnet/egta.hpp"
#include "cprnet/env.hpp"

namespace cprnet {

nlohmann::json env_config_to_json(const EnvConfig& config);
EnvConfig env_config_from_json(const nlohmann::json& j);

// Parameter vectors plus a manifest of (name, shape) pairs per agent; the
// manifest order is the module's fixed parameter order.
nlohmann::json snapshot_to_json(const PolicySnapshot& snapshot);
PolicySnapshot snapshot_from_json(const nlohmann::json& j);

void save_snapshot(const PolicySnapshot& snapshot, const std::filesystem::path& path);
PolicySnapshot load_snapshot(const std::filesystem::path& path);

// Write-temp-then-rename; creates parent directories.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace cprnet
