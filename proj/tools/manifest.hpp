#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rfrac::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Sidecar written next to every output file as <out>.manifest.json.
/// Timestamps live only here, so output files stay byte-identical across runs.
struct RunManifest {
  std::string subcommand;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> weight_files;
  std::string started;
  std::string finished;

  nlohmann::json to_json() const;
};

std::string utc_timestamp();
std::string manifest_path(const std::string& out);

}  // namespace rfrac::cli
