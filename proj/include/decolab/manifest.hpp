#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

// Reproducibility bookkeeping for the CLI: every command records what it
// ran, the hashes of its inputs and the hashes of the files it wrote.
// Identical inputs in serial mode reproduce byte-identical outputs, so the
// manifest doubles as a regression tripwire.

namespace decolab {

inline constexpr const char* kToolVersion = "decolab 0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
/// Hash of a file's bytes; throws if the file cannot be read.
std::string file_checksum(const std::string& path);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string dataset_checksum;
  std::string tool_version = kToolVersion;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, checksum
  double wall_time_ms = 0.0;

  void add_output(const std::string& path);
  nlohmann::json to_json() const;
  /// Writes the manifest JSON and returns the path.
  std::string write(const std::string& out_dir) const;
};

}  // namespace decolab
