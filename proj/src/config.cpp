#include "hmcgr/config.hpp"

#include <fstream>
#include <sstream>

namespace hmcgr {

using nlohmann::json;

void HybridConfig::validate() const {
  if (!use_cls && !use_gen)
    throw ConfigError("at least one of use_cls/use_gen must be enabled");
  if (use_rfx && lexicon_path.empty())
    throw ConfigError("use_rfx requires lexicon_path");
  if (optimizer_name != "adamw" && optimizer_name != "sgd")
    throw ConfigError("unknown optimizer '" + optimizer_name + "'");
  if (rfx_scope != "all" && rfx_scope != "gold")
    throw ConfigError("rfx_scope must be 'all' or 'gold'");
  if (provider != "rule" && provider != "none")
    throw ConfigError("unknown provider '" + provider + "'");
  if (hidden_size <= 0 || attention_heads <= 0 || hidden_size % attention_heads != 0)
    throw ConfigError("hidden_size must be a positive multiple of attention_heads");
  if (batch_size <= 0 || max_epochs < 0 || tagger_epochs < 0)
    throw ConfigError("batch_size/max_epochs/tagger_epochs out of range");
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ConfigError("split_ratio must lie in (0, 1)");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0)
    throw ConfigError("dev_fraction must lie in [0, 1)");
}

json HybridConfig::to_json() const {
  return json{{"use_cls", use_cls},
              {"use_gen", use_gen},
              {"use_rfx", use_rfx},
              {"use_gcn", use_gcn},
              {"use_cross_attention", use_cross_attention},
              {"learning_rate", learning_rate},
              {"batch_size", batch_size},
              {"seed", seed},
              {"optimizer_name", optimizer_name},
              {"max_epochs", max_epochs},
              {"tagger_epochs", tagger_epochs},
              {"early_stopping_patience", early_stopping_patience},
              {"dev_fraction", dev_fraction},
              {"split_ratio", split_ratio},
              {"hidden_size", hidden_size},
              {"encoder_layers", encoder_layers},
              {"attention_heads", attention_heads},
              {"ffn_size", ffn_size},
              {"max_positions", max_positions},
              {"gcn_layers", gcn_layers},
              {"max_decode_len", max_decode_len},
              {"w_cls", w_cls},
              {"w_gen", w_gen},
              {"w_rfx", w_rfx},
              {"rfx_scope", rfx_scope},
              {"corpus_path", corpus_path},
              {"lexicon_path", lexicon_path},
              {"provider", provider}};
}

HybridConfig HybridConfig::from_json(const json& j) {
  HybridConfig c;
  json merged = c.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!merged.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    merged[key] = value;
  }
  try {
    c.use_cls = merged.at("use_cls").get<bool>();
    c.use_gen = merged.at("use_gen").get<bool>();
    c.use_rfx = merged.at("use_rfx").get<bool>();
    c.use_gcn = merged.at("use_gcn").get<bool>();
    c.use_cross_attention = merged.at("use_cross_attention").get<bool>();
    c.learning_rate = merged.at("learning_rate").get<double>();
    c.batch_size = merged.at("batch_size").get<int>();
    c.seed = merged.at("seed").get<std::uint64_t>();
    c.optimizer_name = merged.at("optimizer_name").get<std::string>();
    c.max_epochs = merged.at("max_epochs").get<int>();
    c.tagger_epochs = merged.at("tagger_epochs").get<int>();
    c.early_stopping_patience = merged.at("early_stopping_patience").get<int>();
    c.dev_fraction = merged.at("dev_fraction").get<double>();
    c.split_ratio = merged.at("split_ratio").get<double>();
    c.hidden_size = merged.at("hidden_size").get<int>();
    c.encoder_layers = merged.at("encoder_layers").get<int>();
    c.attention_heads = merged.at("attention_heads").get<int>();
    c.ffn_size = merged.at("ffn_size").get<int>();
    c.max_positions = merged.at("max_positions").get<int>();
    c.gcn_layers = merged.at("gcn_layers").get<int>();
    c.max_decode_len = merged.at("max_decode_len").get<int>();
    c.w_cls = merged.at("w_cls").get<double>();
    c.w_gen = merged.at("w_gen").get<double>();
    c.w_rfx = merged.at("w_rfx").get<double>();
    c.rfx_scope = merged.at("rfx_scope").get<std::string>();
    c.corpus_path = merged.at("corpus_path").get<std::string>();
    c.lexicon_path = merged.at("lexicon_path").get<std::string>();
    c.provider = merged.at("provider").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return c;
}

HybridConfig HybridConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void HybridConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config '" + path + "'");
  out << to_json().dump(2) << "\n";
}

void HybridConfig::apply_override(const std::string& key, const std::string& value) {
  json j = to_json();
  if (!j.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  json& slot = j[key];
  try {
    if (slot.is_boolean()) {
      if (value == "true" || value == "1") slot = true;
      else if (value == "false" || value == "0") slot = false;
      else throw ConfigError("expected boolean for '" + key + "', got '" + value + "'");
    } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
      slot = std::stoll(value);
    } else if (slot.is_number_float()) {
      slot = std::stod(value);
    } else {
      slot = value;
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse '" + value + "' for key '" + key + "'");
  }
  *this = from_json(j);
}

}  // namespace hmcgr
