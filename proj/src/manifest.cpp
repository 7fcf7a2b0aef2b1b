#include "hmcgr/manifest.hpp"

#include <chrono>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hmcgr {

std::string fingerprint_bytes(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "' for fingerprinting");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fingerprint_bytes(ss.str());
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  return nlohmann::json{{"command", command},
                        {"config", resolved_config},
                        {"corpus_fingerprint", corpus_fingerprint},
                        {"seed", seed},
                        {"code_version", code_version},
                        {"started_at", started_at},
                        {"finished_at", finished_at}};
}

void RunManifest::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::filesystem::path path = std::filesystem::path(dir) / "manifest.json";
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write manifest to '" + dir + "'");
    out << to_json().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hmcgr
