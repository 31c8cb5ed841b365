#include "decolab/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace decolab {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::ostringstream os;
  os << std::hex << fnv1a64(bytes);
  return os.str();
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_checksum: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

void RunManifest::add_output(const std::string& path) {
  outputs.emplace_back(path, file_checksum(path));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["dataset_checksum"] = dataset_checksum;
  j["tool_version"] = tool_version;
  j["outputs"] = nlohmann::json::array();
  for (const auto& [path, checksum] : outputs) {
    j["outputs"].push_back({{"path", path}, {"checksum", checksum}});
  }
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

std::string RunManifest::write(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunManifest: cannot write '" + path + "'");
  out << to_json().dump(2) << "\n";
  return path;
}

}  // namespace decolab
