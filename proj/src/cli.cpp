#include "hmcgr/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmcgr/config.hpp"
#include "hmcgr/corpus.hpp"
#include "hmcgr/manifest.hpp"
#include "hmcgr/pipeline.hpp"
#include "hmcgr/xml.hpp"

namespace hmcgr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// Relative paths resolve against the matching root environment variable.
std::string resolve_root(const std::string& path, const char* env_name) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  std::string root = env_or_empty(env_name);
  if (root.empty()) return path;
  return (fs::path(root) / path).string();
}

std::string resolve_corpus(const std::string& path) {
  return resolve_root(path, "HMCGR_CORPUS_ROOT");
}

std::string resolve_checkpoint(const std::string& path) {
  return resolve_root(path, "HMCGR_CHECKPOINT_ROOT");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  std::string out;
  std::string subset = "all";
};

HybridConfig resolved_config(const CommonOptions& opt) {
  HybridConfig cfg =
      opt.config_path.empty() ? HybridConfig{} : HybridConfig::load(opt.config_path);
  for (const auto& kv : opt.overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--override expects KEY=VALUE, got '" + kv + "'");
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  cfg.validate();
  return cfg;
}

RunManifest start_manifest(const std::string& command, const json& config,
                           const std::string& corpus_fingerprint, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.resolved_config = config;
  m.corpus_fingerprint = corpus_fingerprint;
  m.seed = seed;
  m.code_version = kCodeVersion;
  m.started_at = utc_timestamp();
  return m;
}

// Accepts either a model directory (config.json present) or a training run
// directory (best/ preferred over last/).
fs::path resolve_model_dir(const std::string& checkpoint) {
  fs::path dir = resolve_checkpoint(checkpoint);
  if (fs::exists(dir / "config.json")) return dir;
  if (fs::exists(dir / "best" / "config.json")) return dir / "best";
  if (fs::exists(dir / "last" / "config.json")) return dir / "last";
  throw ConfigError("no checkpoint found under '" + dir.string() + "'");
}

std::vector<Document> load_corpus_file(const std::string& path) {
  return corpus_from_jsonl(read_file(path));
}

// ---- ingest -------------------------------------------------------------------

int cmd_ingest(const std::string& input_dir, const CommonOptions& opt) {
  if (opt.out.empty()) throw ConfigError("ingest requires --out");
  fs::path in_dir = resolve_corpus(input_dir);
  if (!fs::is_directory(in_dir)) {
    std::cerr << "hmcgr ingest: '" << in_dir.string() << "' is not a directory\n";
    return kUsageError;
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".xml")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "hmcgr ingest: no input documents in '" << in_dir.string() << "'\n";
    return kUsageError;
  }

  std::string input_bytes;
  std::vector<Document> docs;
  std::vector<std::string> warnings;
  for (const auto& file : files) {
    std::string bytes = read_file(file);
    input_bytes += bytes;
    docs.push_back(parse_corpus_xml(bytes, file.stem().string(), &warnings));
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  fs::path out_path = resolve_corpus(opt.out);
  write_file(out_path, corpus_to_jsonl(docs));

  LinkHistogram h = count_links(docs);
  int element_count = 0;
  for (const auto& d : docs) element_count += static_cast<int>(d.elements.size());
  json report{{"documents", docs.size()},
              {"elements", element_count},
              {"links", h.total},
              {"null_role_links", h.null_role_total},
              {"null_role_fraction", h.null_role_fraction()},
              {"qslink", h.count(LinkType::QsLink)},
              {"olink", h.count(LinkType::OLink)},
              {"movelink", h.count(LinkType::MoveLink)},
              {"warnings", warnings.size()}};
  std::cout << report.dump(2) << "\n";

  RunManifest m = start_manifest("ingest", json{{"input_dir", in_dir.string()}},
                                 fingerprint_bytes(input_bytes), 0);
  m.finished_at = utc_timestamp();
  write_file(out_path.string() + ".manifest.json", m.to_json().dump(2) + "\n");
  return kOk;
}

// ---- train --------------------------------------------------------------------

int cmd_train(const CommonOptions& opt) {
  HybridConfig cfg = resolved_config(opt);
  if (cfg.corpus_path.empty()) throw ConfigError("config needs corpus_path");
  if (opt.out.empty()) throw ConfigError("train requires --out");

  std::string corpus_file = resolve_corpus(cfg.corpus_path);
  std::string corpus_bytes = read_file(corpus_file);
  std::vector<Document> docs = corpus_from_jsonl(corpus_bytes);

  SplitResult split = split_dataset(docs, cfg.split_ratio, cfg.seed);
  fs::path out_dir = resolve_checkpoint(opt.out);
  fs::create_directories(out_dir);

  json splits;
  for (const auto& d : split.train) splits["train"].push_back(d.doc_id);
  for (const auto& d : split.test) splits["test"].push_back(d.doc_id);
  write_file(out_dir / "splits.json", splits.dump(2) + "\n");

  RunManifest manifest =
      start_manifest("train", cfg.to_json(), fingerprint_bytes(corpus_bytes), cfg.seed);

  HybridModel model = HybridModel::build(cfg, split.train);
  TrainResult result = train(model, split.train, out_dir.string());

  json summary;
  summary["epochs"] = result.epochs.size();
  summary["best_epoch"] = result.best_epoch;
  summary["best_dev_f1"] = result.best_dev_f1;
  if (!result.epochs.empty()) {
    summary["first_epoch_loss"] = result.epochs.front().mean_loss;
    summary["last_epoch_loss"] = result.epochs.back().mean_loss;
  }
  std::cout << summary.dump(2) << "\n";

  manifest.finished_at = utc_timestamp();
  manifest.write(out_dir.string());
  return kOk;
}

// ---- predict / evaluate ---------------------------------------------------------

json link_to_json(const PredictedLink& p) {
  auto span = [](const std::optional<CharSpan>& s) -> json {
    if (!s) return nullptr;
    return json::array({s->begin, s->end});
  };
  return json{{"doc_id", p.key.doc_id},
              {"type", std::string(to_string(p.key.type))},
              {"tm", span(p.key.tm)},
              {"tr", span(p.key.tr)},
              {"lg", span(p.key.lg)},
              {"source", p.source == Branch::Cls ? "cls" : "gen"}};
}

std::vector<Document> select_split(const std::vector<Document>& docs,
                                   const fs::path& model_dir, const std::string& split) {
  if (split == "all" || split.empty()) return docs;
  fs::path splits_path = model_dir / "splits.json";
  if (!fs::exists(splits_path)) splits_path = model_dir.parent_path() / "splits.json";
  if (!fs::exists(splits_path))
    throw ConfigError("--split " + split + " needs splits.json next to the checkpoint");
  json splits = json::parse(read_file(splits_path));
  if (!splits.contains(split)) throw ConfigError("splits.json has no '" + split + "' entry");
  std::set<std::string> wanted;
  for (const auto& id : splits[split]) wanted.insert(id.get<std::string>());
  std::vector<Document> out;
  for (const auto& d : docs)
    if (wanted.contains(d.doc_id)) out.push_back(d);
  return out;
}

int cmd_predict(const std::string& checkpoint, const std::string& corpus,
                const std::string& split, const CommonOptions& opt) {
  if (opt.out.empty()) throw ConfigError("predict requires --out");
  fs::path model_dir = resolve_model_dir(checkpoint);
  HybridModel model = HybridModel::load(model_dir.string());
  std::string corpus_bytes = read_file(resolve_corpus(corpus));
  std::vector<Document> docs =
      select_split(corpus_from_jsonl(corpus_bytes), model_dir, split);

  DecodeResult result = decode(model, docs);
  std::string out_lines;
  for (const auto& p : result.links) {
    out_lines += link_to_json(p).dump();
    out_lines += '\n';
  }
  fs::path out_path = resolve_checkpoint(opt.out);
  write_file(out_path, out_lines);
  write_file(out_path.string() + ".diagnostics.jsonl",
             diagnostics_to_jsonl(result.diagnostics));

  RunManifest m = start_manifest("predict", model.config().to_json(),
                                 fingerprint_bytes(corpus_bytes), model.config().seed);
  m.finished_at = utc_timestamp();
  write_file(out_path.string() + ".manifest.json", m.to_json().dump(2) + "\n");
  std::cout << "predicted " << result.links.size() << " links over " << docs.size()
            << " documents\n";
  return kOk;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& corpus,
                 const std::string& split, bool sanity_gold, const CommonOptions& opt) {
  fs::path model_dir = resolve_model_dir(checkpoint);
  std::string corpus_bytes = read_file(resolve_corpus(corpus));
  std::vector<Document> docs =
      select_split(corpus_from_jsonl(corpus_bytes), model_dir, split);

  std::vector<LinkKey> predictions;
  json config_json;
  std::uint64_t seed = 0;
  if (sanity_gold) {
    for (const auto& doc : docs)
      for (const auto& link : doc.gold_links) predictions.push_back(gold_link_key(doc, link));
    config_json = json{{"sanity_gold", true}};
  } else {
    HybridModel model = HybridModel::load(model_dir.string());
    DecodeResult result = decode(model, docs);
    predictions = keys_of(result.links);
    config_json = model.config().to_json();
    seed = model.config().seed;
  }

  EvalReport report = evaluate(predictions, docs);
  std::cout << report.to_table();
  const MetricRow& row = report.row_for_subset(opt.subset);
  std::cout << "subset " << opt.subset << ": P " << row.precision << " R " << row.recall
            << " F1 " << row.f1 << "\n";

  if (!opt.out.empty()) {
    fs::path out_dir = resolve_checkpoint(opt.out);
    fs::create_directories(out_dir);
    write_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(out_dir / "report.txt", report.to_table());
    RunManifest m =
        start_manifest("evaluate", config_json, fingerprint_bytes(corpus_bytes), seed);
    m.finished_at = utc_timestamp();
    m.write(out_dir.string());
  }
  return kOk;
}

// ---- ablate ---------------------------------------------------------------------

int cmd_ablate(const CommonOptions& opt) {
  HybridConfig cfg = resolved_config(opt);
  if (cfg.corpus_path.empty()) throw ConfigError("config needs corpus_path");
  if (opt.out.empty()) throw ConfigError("ablate requires --out");

  std::string corpus_bytes = read_file(resolve_corpus(cfg.corpus_path));
  std::vector<Document> docs = corpus_from_jsonl(corpus_bytes);
  SplitResult split = split_dataset(docs, cfg.split_ratio, cfg.seed);

  fs::path out_dir = resolve_checkpoint(opt.out);
  fs::create_directories(out_dir);
  RunManifest manifest =
      start_manifest("ablate", cfg.to_json(), fingerprint_bytes(corpus_bytes), cfg.seed);

  auto rows = run_ablation(cfg, split.train, split.test, out_dir.string());
  std::string table = ablation_table(rows);
  std::cout << table;
  write_file(out_dir / "ablation.txt", table);
  json all;
  for (const auto& row : rows) all[row.name] = row.report.to_json();
  write_file(out_dir / "ablation.json", all.dump(2) + "\n");

  manifest.finished_at = utc_timestamp();
  manifest.write(out_dir.string());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("hmcgr");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Hybrid spatial relation extraction"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string input_dir, checkpoint, corpus, split = "all";
  bool sanity_gold = false;

  auto add_common = [&](CLI::App* cmd, bool with_config) {
    if (with_config) {
      cmd->add_option("--config", opt.config_path, "JSON config file");
      cmd->add_option("--override", opt.overrides, "KEY=VALUE config override (repeatable)");
      cmd->add_option("--seed", opt.seed, "seed override");
    }
    cmd->add_option("--out", opt.out, "output path");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "parse annotated XML into a JSONL corpus");
  ingest->add_option("input_dir", input_dir, "directory of XML files")->required();
  add_common(ingest, false);

  CLI::App* train_cmd = app.add_subcommand("train", "train the tagger and the hybrid model");
  add_common(train_cmd, true);

  CLI::App* predict = app.add_subcommand("predict", "decode links with a trained checkpoint");
  predict->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  predict->add_option("--corpus", corpus, "JSONL corpus file")->required();
  predict->add_option("--split", split, "all|train|test (needs splits.json)");
  add_common(predict, false);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint against gold links");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  eval_cmd->add_option("--corpus", corpus, "JSONL corpus file")->required();
  eval_cmd->add_option("--split", split, "all|train|test (needs splits.json)");
  eval_cmd->add_option("--subset", opt.subset, "all|null-role|qslink|olink|movelink")
      ->check(CLI::IsMember({"all", "null-role", "qslink", "olink", "movelink"}));
  eval_cmd->add_flag("--sanity-gold", sanity_gold, "score gold links against themselves");
  add_common(eval_cmd, false);

  CLI::App* ablate = app.add_subcommand("ablate", "run the module ablation matrix");
  add_common(ablate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(input_dir, opt);
    if (train_cmd->parsed()) return cmd_train(opt);
    if (predict->parsed()) return cmd_predict(checkpoint, corpus, split, opt);
    if (eval_cmd->parsed()) return cmd_evaluate(checkpoint, corpus, split, sanity_gold, opt);
    if (ablate->parsed()) return cmd_ablate(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace hmcgr::cli
