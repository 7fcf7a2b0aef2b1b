#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace hmcgr {

// FNV-1a 64-bit content hash (hex).
std::string fingerprint_bytes(std::string_view bytes);
std::string fingerprint_file(const std::string& path);

// Run provenance: every command writes exactly one manifest. Reruns with an
// identical manifest (timestamps aside) produce identical outputs.
struct RunManifest {
  std::string command;
  nlohmann::json resolved_config;
  std::string corpus_fingerprint;
  std::uint64_t seed = 0;
  std::string code_version;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;

  nlohmann::json to_json() const;
  void write(const std::string& dir) const;  // <dir>/manifest.json
};

std::string utc_timestamp();

}  // namespace hmcgr
