#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hmcgr/cli.hpp"
#include "hmcgr/config.hpp"
#include "hmcgr/corpus.hpp"
#include "test_support.hpp"

using namespace hmcgr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hmcgr_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_tiny_train_config(const fs::path& dir, const std::string& corpus_path) {
  HybridConfig cfg;
  cfg.hidden_size = 16;
  cfg.attention_heads = 2;
  cfg.encoder_layers = 1;
  cfg.ffn_size = 32;
  cfg.max_positions = 64;
  cfg.gcn_layers = 1;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 4;
  cfg.max_epochs = 1;
  cfg.tagger_epochs = 1;
  cfg.dev_fraction = 0.0;
  cfg.split_ratio = 0.8;
  cfg.corpus_path = corpus_path;
  cfg.lexicon_path = test_support::fixture_path("../../data/antonyms.tsv").string();
  fs::path path = dir / "config.json";
  cfg.save(path.string());
  return path;
}

}  // namespace

TEST_CASE("cli: no subcommand or bad flags exit with the usage code") {
  CHECK(cli::run(std::vector<std::string>{}) == cli::kUsageError);
  CHECK(cli::run({"frobnicate"}) == cli::kUsageError);
  CHECK(cli::run({"evaluate"}) == cli::kUsageError);  // missing required options
}

TEST_CASE("cli ingest: fixture directory produces corpus, report and manifest") {
  fs::path dir = fresh_dir("ingest");
  fs::path out = dir / "corpus.jsonl";
  int rc = cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                     out.string()});
  CHECK(rc == cli::kOk);
  REQUIRE(fs::exists(out));
  auto docs = corpus_from_jsonl(std::string((std::ostringstream()
                                             << std::ifstream(out).rdbuf())
                                                .str()));
  CHECK(docs.size() == 5);
  REQUIRE(fs::exists(out.string() + ".manifest.json"));
  json manifest = json::parse(std::ifstream(out.string() + ".manifest.json"));
  CHECK(manifest["command"] == "ingest");
  std::string fp1 = manifest["corpus_fingerprint"];

  // Rerun: identical fingerprint.
  CHECK(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                  out.string()}) == cli::kOk);
  json manifest2 = json::parse(std::ifstream(out.string() + ".manifest.json"));
  CHECK(manifest2["corpus_fingerprint"] == fp1);
}

TEST_CASE("cli ingest: empty directory exits 2 with a message") {
  fs::path dir = fresh_dir("ingest_empty");
  fs::path empty = dir / "empty";
  fs::create_directories(empty);
  CHECK(cli::run({"ingest", empty.string(), "--out", (dir / "c.jsonl").string()}) ==
        cli::kUsageError);
}

TEST_CASE("cli ingest: figure-one fixture reports 4 links, 3 null-role") {
  fs::path dir = fresh_dir("ingest_fig1");
  fs::path in = dir / "in";
  fs::create_directories(in);
  fs::copy_file(test_support::fixture_path("figure1.xml"), in / "figure1.xml");
  fs::path out = dir / "corpus.jsonl";
  CHECK(cli::run({"ingest", in.string(), "--out", out.string()}) == cli::kOk);
  auto docs = corpus_from_jsonl(std::string((std::ostringstream()
                                             << std::ifstream(out).rdbuf())
                                                .str()));
  REQUIRE(docs.size() == 1);
  LinkHistogram h = count_links(docs);
  CHECK(h.total == 4);
  CHECK(h.null_role_total == 3);
}

TEST_CASE("cli train/evaluate/predict round trip on the smoke corpus") {
  fs::path dir = fresh_dir("train");
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                    corpus.string()}) == cli::kOk);
  fs::path cfg_path = write_tiny_train_config(dir, corpus.string());

  fs::path run_dir = dir / "run";
  int rc = cli::run({"train", "--config", cfg_path.string(), "--out", run_dir.string()});
  CHECK(rc == cli::kOk);
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "splits.json"));
  CHECK(fs::exists(run_dir / "metrics.csv"));
  CHECK(fs::exists(run_dir / "last" / "weights.bin"));

  json manifest = json::parse(std::ifstream(run_dir / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["config"]["seed"] == 1024);

  // Evaluate on the training split (sanity: runs end to end, writes reports).
  fs::path eval_dir = dir / "eval";
  rc = cli::run({"evaluate", "--checkpoint", run_dir.string(), "--corpus", corpus.string(),
                 "--split", "train", "--out", eval_dir.string()});
  CHECK(rc == cli::kOk);
  CHECK(fs::exists(eval_dir / "report.json"));
  CHECK(fs::exists(eval_dir / "report.txt"));
  CHECK(fs::exists(eval_dir / "manifest.json"));

  // Gold-as-predictions sanity mode yields 100s everywhere.
  fs::path gold_dir = dir / "gold_eval";
  rc = cli::run({"evaluate", "--checkpoint", run_dir.string(), "--corpus", corpus.string(),
                 "--sanity-gold", "--out", gold_dir.string()});
  CHECK(rc == cli::kOk);
  json report = json::parse(std::ifstream(gold_dir / "report.json"));
  CHECK(report["overall"]["precision"].get<double>() == doctest::Approx(100.0));
  CHECK(report["overall"]["recall"].get<double>() == doctest::Approx(100.0));
  CHECK(report["null_role"]["f1"].get<double>() == doctest::Approx(100.0));

  // Null-role subset flag selects the null-role row.
  rc = cli::run({"evaluate", "--checkpoint", run_dir.string(), "--corpus", corpus.string(),
                 "--sanity-gold", "--subset", "null-role"});
  CHECK(rc == cli::kOk);

  // Predict writes one JSON line per link plus diagnostics and a manifest.
  fs::path preds = dir / "preds.jsonl";
  rc = cli::run({"predict", "--checkpoint", run_dir.string(), "--corpus", corpus.string(),
                 "--out", preds.string()});
  CHECK(rc == cli::kOk);
  CHECK(fs::exists(preds));
  CHECK(fs::exists(preds.string() + ".diagnostics.jsonl"));
  CHECK(fs::exists(preds.string() + ".manifest.json"));
}

TEST_CASE("cli train: invalid toggle combination is a config error before training") {
  fs::path dir = fresh_dir("badcfg");
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                    corpus.string()}) == cli::kOk);
  fs::path cfg_path = write_tiny_train_config(dir, corpus.string());
  CHECK(cli::run({"train", "--config", cfg_path.string(), "--override", "use_cls=false",
                  "--override", "use_gen=false", "--out", (dir / "run").string()}) ==
        cli::kUsageError);

  // Missing lexicon with rfx enabled is likewise a config error.
  CHECK(cli::run({"train", "--config", cfg_path.string(), "--override", "lexicon_path=",
                  "--out", (dir / "run2").string()}) == cli::kUsageError);
}

TEST_CASE("cli: overrides are recorded in the manifest and flags win") {
  fs::path dir = fresh_dir("override");
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                    corpus.string()}) == cli::kOk);
  fs::path cfg_path = write_tiny_train_config(dir, corpus.string());
  fs::path run_dir = dir / "run";
  int rc = cli::run({"train", "--config", cfg_path.string(), "--override", "use_rfx=false",
                     "--seed", "7", "--out", run_dir.string()});
  CHECK(rc == cli::kOk);
  json manifest = json::parse(std::ifstream(run_dir / "manifest.json"));
  CHECK(manifest["config"]["use_rfx"] == false);
  CHECK(manifest["config"]["seed"] == 7);
  CHECK(manifest["seed"] == 7);
}

TEST_CASE("cli: corpus root environment variable resolves relative paths") {
  fs::path dir = fresh_dir("envroot");
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                    corpus.string()}) == cli::kOk);
  setenv("HMCGR_CORPUS_ROOT", dir.string().c_str(), 1);
  fs::path cfg_path = write_tiny_train_config(dir, "corpus.jsonl");  // relative
  fs::path run_dir = dir / "run";
  int rc = cli::run({"train", "--config", cfg_path.string(), "--out", run_dir.string()});
  unsetenv("HMCGR_CORPUS_ROOT");
  CHECK(rc == cli::kOk);
}

TEST_CASE("cli ablate runs the eight-row matrix on the fixture corpus") {
  fs::path dir = fresh_dir("ablate");
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(cli::run({"ingest", test_support::fixture_path("smoke").string(), "--out",
                    corpus.string()}) == cli::kOk);
  fs::path cfg_path = write_tiny_train_config(dir, corpus.string());
  fs::path out_dir = dir / "ablation";
  int rc = cli::run({"ablate", "--config", cfg_path.string(), "--out", out_dir.string()});
  CHECK(rc == cli::kOk);
  REQUIRE(fs::exists(out_dir / "ablation.json"));
  json all = json::parse(std::ifstream(out_dir / "ablation.json"));
  CHECK(all.size() == 8);
  CHECK(all.contains("GEN"));
  CHECK(all.contains("CLS"));
  CHECK(all.contains("full"));
  CHECK(all.contains("w/o GCN"));
  CHECK(all.contains("w/o CrossAtt"));
  CHECK(fs::exists(out_dir / "ablation.txt"));
  CHECK(fs::exists(out_dir / "manifest.json"));
}
