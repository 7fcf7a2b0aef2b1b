#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace hmcgr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kCheckpointSchemaVersion = 1;

// Resolved run configuration. Defaults mirror the published training setup
// (AdamW, lr 2e-5, batch 4, seed 1024, hidden 768); tests and desk-scale
// runs override the architecture knobs downward.
struct HybridConfig {
  // Module toggles.
  bool use_cls = true;
  bool use_gen = true;
  bool use_rfx = true;
  bool use_gcn = true;
  bool use_cross_attention = true;

  // Optimization.
  double learning_rate = 2e-5;
  int batch_size = 4;
  std::uint64_t seed = 1024;
  std::string optimizer_name = "adamw";
  int max_epochs = 20;
  int tagger_epochs = 20;
  int early_stopping_patience = 5;
  double dev_fraction = 0.1;
  double split_ratio = 0.8;

  // Architecture.
  int hidden_size = 768;
  int encoder_layers = 2;
  int attention_heads = 8;
  int ffn_size = 0;  // 0 resolves to 4 * hidden_size
  int max_positions = 512;
  int gcn_layers = 2;
  int max_decode_len = 160;

  // Loss weights (unit by default).
  double w_cls = 1.0;
  double w_gen = 1.0;
  double w_rfx = 1.0;
  std::string rfx_scope = "all";  // "all" | "gold"

  // Resources.
  std::string corpus_path;
  std::string lexicon_path;
  std::string provider = "rule";

  int resolved_ffn() const { return ffn_size > 0 ? ffn_size : 4 * hidden_size; }

  void validate() const;

  nlohmann::json to_json() const;
  static HybridConfig from_json(const nlohmann::json& j);
  static HybridConfig load(const std::string& path);
  void save(const std::string& path) const;

  // KEY=VALUE override; the value is parsed by the key's declared type.
  void apply_override(const std::string& key, const std::string& value);
};

}  // namespace hmcgr
