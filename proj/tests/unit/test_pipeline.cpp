#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "hmcgr/manifest.hpp"
#include "hmcgr/pipeline.hpp"
#include "test_support.hpp"

using namespace hmcgr;
namespace fs = std::filesystem;

namespace {

HybridConfig tiny_config() {
  HybridConfig cfg;
  cfg.hidden_size = 16;
  cfg.attention_heads = 2;
  cfg.encoder_layers = 1;
  cfg.ffn_size = 32;
  cfg.max_positions = 64;
  cfg.gcn_layers = 1;
  cfg.max_decode_len = 160;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 4;
  cfg.max_epochs = 2;
  cfg.tagger_epochs = 2;
  cfg.dev_fraction = 0.0;
  cfg.lexicon_path = test_support::fixture_path("../../data/antonyms.tsv").string();
  return cfg;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hmcgr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults mirror the published setup and validate") {
  HybridConfig cfg;
  CHECK(cfg.learning_rate == 2e-5);
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.seed == 1024);
  CHECK(cfg.hidden_size == 768);
  CHECK(cfg.optimizer_name == "adamw");
  CHECK(cfg.resolved_ffn() == 4 * 768);

  HybridConfig bad = cfg;
  bad.use_cls = false;
  bad.use_gen = false;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  HybridConfig no_lex = cfg;
  no_lex.use_rfx = true;
  no_lex.lexicon_path = "";
  CHECK_THROWS_AS(no_lex.validate(), ConfigError);

  HybridConfig ok = tiny_config();
  ok.validate();
}

TEST_CASE("config json round trip, overrides and unknown keys") {
  HybridConfig cfg = tiny_config();
  HybridConfig back = HybridConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  cfg.apply_override("use_rfx", "false");
  CHECK(!cfg.use_rfx);
  cfg.apply_override("learning_rate", "0.01");
  CHECK(cfg.learning_rate == 0.01);
  cfg.apply_override("batch_size", "2");
  CHECK(cfg.batch_size == 2);
  cfg.apply_override("optimizer_name", "sgd");
  CHECK(cfg.optimizer_name == "sgd");
  CHECK_THROWS_AS(cfg.apply_override("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("batch_size", "abc"), ConfigError);
  CHECK_THROWS_AS(HybridConfig::from_json({{"bogus", 1}}), ConfigError);
}

TEST_CASE("training examples carry teacher candidates and gen targets") {
  auto docs = test_support::load_smoke_corpus();
  HybridModel model = HybridModel::build(tiny_config(), docs);
  auto examples = build_examples(model, docs);
  REQUIRE(examples.size() == 5);

  const SentenceExample* doc1 = nullptr;
  const SentenceExample* doc3 = nullptr;
  for (const auto& ex : examples) {
    if (ex.doc->doc_id == "doc1") doc1 = &ex;
    if (ex.doc->doc_id == "doc3") doc3 = &ex;
  }
  REQUIRE(doc1);
  REQUIRE(doc3);
  CHECK(doc1->candidates.size() == 8);
  CHECK(split_blocks(doc1->gen_target).size() == 4);
  // who -> children gives doc1's OLINK block a referential prefix.
  CHECK(doc1->gen_target.find("The token ``who'' stands for ``children''") !=
        std::string::npos);

  CHECK(doc3->candidates.size() == 2);
  int positives = 0;
  for (const auto& lc : doc3->candidates)
    if (lc.label != LinkType::Null) ++positives;
  CHECK(positives == 1);
  CHECK(split_blocks(doc3->gen_target).size() == 2);
}

TEST_CASE("batch loss composes exactly the enabled terms") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  HybridModel model = HybridModel::build(cfg, docs);
  auto examples = build_examples(model, docs);

  nn::Tape tape;
  BatchLoss all = batch_loss(model, tape, examples);
  CHECK(all.cls > 0.0);
  CHECK(all.gen > 0.0);
  CHECK(all.rfx >= 0.0);
  CHECK(all.cls_candidates == 16);  // 8 + 1 + 2 + 1 + 4 across the five docs
  CHECK(nn::scalar_value(all.total) ==
        doctest::Approx(all.cls + all.gen + all.rfx).epsilon(1e-9));

  // With gen and rfx disabled the total is exactly the cls term.
  HybridConfig cls_only_cfg = cfg;
  cls_only_cfg.use_gen = false;
  cls_only_cfg.use_rfx = false;
  HybridModel cls_only = HybridModel::build(cls_only_cfg, docs);
  auto ex2 = build_examples(cls_only, docs);
  nn::Tape tape2;
  BatchLoss only = batch_loss(cls_only, tape2, ex2);
  CHECK(only.gen == 0.0);
  CHECK(only.rfx == 0.0);
  CHECK(nn::scalar_value(only.total) == doctest::Approx(only.cls).epsilon(1e-12));

  // An empty batch yields a constant zero with no gradient path.
  nn::Tape tape3;
  BatchLoss none = batch_loss(model, tape3, {});
  CHECK(nn::scalar_value(none.total) == 0.0);
  CHECK(!none.total->requires_grad);
}

TEST_CASE("loss weights scale the enabled terms") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  cfg.w_cls = 2.0;
  cfg.w_gen = 0.5;
  cfg.w_rfx = 0.0;
  HybridModel model = HybridModel::build(cfg, docs);
  auto examples = build_examples(model, docs);
  nn::Tape tape;
  BatchLoss loss = batch_loss(model, tape, examples);
  CHECK(nn::scalar_value(loss.total) ==
        doctest::Approx(2.0 * loss.cls + 0.5 * loss.gen + 0.0 * loss.rfx).epsilon(1e-9));
}

TEST_CASE("checkpoint save/load reproduces the model bit for bit") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  HybridModel model = HybridModel::build(cfg, docs);
  fs::path dir = fresh_dir("ckpt");
  model.save(dir.string());

  HybridModel loaded = HybridModel::load(dir.string());
  for (nn::Param* p : model.store().all()) {
    const nn::Param& q = loaded.store().fetch(p->name);
    CHECK((p->value - q.value).norm() == 0.0);
  }

  DecodeResult a = decode(model, docs);
  DecodeResult b = decode(loaded, docs);
  REQUIRE(a.links.size() == b.links.size());
  for (std::size_t i = 0; i < a.links.size(); ++i) CHECK(a.links[i].key == b.links[i].key);

  // Tampered schema version is a versioning error.
  auto cfg_path = dir / "config.json";
  auto j = nlohmann::json::parse(std::ifstream(cfg_path));
  j["schema_version"] = 999;
  std::ofstream(cfg_path) << j.dump();
  CHECK_THROWS_AS(HybridModel::load(dir.string()), ConfigError);
}

TEST_CASE("training runs, logs curves, checkpoints, and is seed-deterministic") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();

  auto run = [&](const std::string& name) {
    fs::path dir = fresh_dir(name);
    HybridModel model = HybridModel::build(cfg, docs);
    TrainResult result = train(model, docs, dir.string());
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "last" / "config.json"));
    CHECK(fs::exists(dir / "last" / "weights.bin"));
    CHECK(fs::exists(dir / "best" / "weights.bin"));
    return result;
  };

  TrainResult r1 = run("train1");
  TrainResult r2 = run("train2");
  REQUIRE(!r1.step_losses.empty());
  REQUIRE(r1.step_losses.size() == r2.step_losses.size());
  for (std::size_t i = 0; i < r1.step_losses.size(); ++i)
    CHECK(r1.step_losses[i] == r2.step_losses[i]);
  CHECK(r1.epochs.size() == 2);
}

TEST_CASE("a poisoned weight aborts training with a diagnostic dump") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  cfg.tagger_epochs = 0;
  HybridModel model = HybridModel::build(cfg, docs);
  model.store().fetch("cls.encoder_b.block0.self.q.w").value(0, 0) =
      std::numeric_limits<double>::quiet_NaN();
  fs::path dir = fresh_dir("nan");
  CHECK_THROWS_AS(train(model, docs, dir.string()), TrainingError);
  CHECK(fs::exists(dir / "diverged_batch.json"));
}

TEST_CASE("decode produces a duplicate-free union covering both branches") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  HybridModel model = HybridModel::build(cfg, docs);
  fs::path dir = fresh_dir("decode");
  train(model, docs, dir.string());

  DecodeResult result = decode(model, docs);
  std::set<LinkKey> seen;
  for (const auto& p : result.links) CHECK(seen.insert(p.key).second);
  for (const auto& p : result.cls_branch) CHECK(seen.contains(p.key));
  for (const auto& p : result.gen_branch) CHECK(seen.contains(p.key));
}

TEST_CASE("cls-only decoding never emits null-role links") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  cfg.use_gen = false;
  cfg.use_rfx = false;
  HybridModel model = HybridModel::build(cfg, docs);
  fs::path dir = fresh_dir("clsonly");
  train(model, docs, dir.string());
  DecodeResult result = decode(model, docs);
  CHECK(result.gen_branch.empty());
  for (const auto& p : result.links) CHECK(!p.key.null_role());
}

TEST_CASE("gen-only decoding has an empty cls branch") {
  auto docs = test_support::load_smoke_corpus();
  HybridConfig cfg = tiny_config();
  cfg.use_cls = false;
  cfg.use_rfx = false;
  cfg.max_epochs = 1;
  cfg.tagger_epochs = 1;
  HybridModel model = HybridModel::build(cfg, docs);
  fs::path dir = fresh_dir("genonly");
  train(model, docs, dir.string());
  DecodeResult result = decode(model, docs);
  CHECK(result.cls_branch.empty());
  for (const auto& p : result.links) {
    bool in_gen = false;
    for (const auto& g : result.gen_branch)
      if (g.key == p.key) in_gen = true;
    CHECK(in_gen);
  }
}

TEST_CASE("ablation matrix has the published eight rows") {
  HybridConfig base = tiny_config();
  auto matrix = ablation_matrix(base);
  REQUIRE(matrix.size() == 8);
  CHECK(matrix[0].first == "GEN");
  CHECK(!matrix[0].second.use_cls);
  CHECK(matrix[1].first == "CLS");
  CHECK(!matrix[1].second.use_gen);
  CHECK(matrix[5].first == "full");
  CHECK(!matrix[6].second.use_gcn);
  CHECK(!matrix[7].second.use_cross_attention);
  for (const auto& [name, cfg] : matrix) cfg.validate();
}

TEST_CASE("manifest fingerprints are deterministic and content sensitive") {
  CHECK(fingerprint_bytes("abc") == fingerprint_bytes("abc"));
  CHECK(fingerprint_bytes("abc") != fingerprint_bytes("abd"));
  CHECK(fingerprint_bytes("").size() == 16);

  RunManifest m;
  m.command = "train";
  m.resolved_config = {{"seed", 1024}};
  m.corpus_fingerprint = fingerprint_bytes("corpus");
  m.seed = 1024;
  m.code_version = kCodeVersion;
  m.started_at = utc_timestamp();
  m.finished_at = utc_timestamp();
  fs::path dir = fresh_dir("manifest");
  m.write(dir.string());
  CHECK(fs::exists(dir / "manifest.json"));
  auto j = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  CHECK(j["command"] == "train");
  CHECK(j["seed"] == 1024);
}

TEST_CASE("rfx batching averages exactly the invertible candidates") {
  // A sentence with three candidates: two invertible triggers (in, at) and
  // one without an antonym (taking).
  std::string xml = R"(<SpaceEvalTask id="mix">
<TEXT><![CDATA[The dog in the barn sat at the gate taking food.]]></TEXT>
<TAGS>
<SPATIAL_ENTITY id="se1" start="4" end="7" text="dog"/>
<SPATIAL_SIGNAL id="ss1" start="8" end="10" text="in"/>
<PLACE id="pl1" start="15" end="19" text="barn"/>
<SPATIAL_SIGNAL id="ss2" start="24" end="26" text="at"/>
<PLACE id="pl2" start="31" end="35" text="gate"/>
<MOTION id="mo1" start="36" end="42" text="taking"/>
<QSLINK id="q1" trajector="se1" trigger="ss1" landmark="pl1"/>
<OLINK id="o1" trajector="se1" trigger="ss2" landmark="pl2"/>
<MOVELINK id="m1" mover="se1" trigger="mo1" goal="pl2"/>
</TAGS>
</SpaceEvalTask>)";
  Document doc = parse_corpus_xml(xml, "mix");
  std::vector<Document> docs{doc};

  HybridConfig cfg = tiny_config();
  cfg.use_gen = false;
  HybridModel model = HybridModel::build(cfg, docs);
  auto examples = build_examples(model, docs);
  REQUIRE(examples.size() == 1);
  // dog is TM; in/at/taking are TR; barn/gate are LG -> 6 candidates, of
  // which the 4 with triggers in/at invert and the 2 with taking do not.
  REQUIRE(examples[0].candidates.size() == 6);

  nn::Tape tape;
  BatchLoss loss = batch_loss(model, tape, examples);
  CHECK(loss.rfx_instances == 4);

  // Hand recomputation: mean of the individual reflexivity losses.
  const Sentence& sentence = doc.sentences[0];
  nn::Tape hand;
  DualEncoding enc = model.cls().encode_dual(hand, doc, sentence);
  nn::Rng antonym_rng(model.config().seed);
  double sum = 0.0;
  int n = 0;
  for (const auto& lc : examples[0].candidates) {
    auto ivs = invert_sentence(doc, lc.triplet, model.lexicon(), antonym_rng);
    if (!ivs) continue;
    nn::Node* h_ivt = model.cls().encode_seq2seq(hand, ivs->words);
    sum += nn::scalar_value(rfx_loss(enc.h_ct, h_ivt));
    ++n;
  }
  REQUIRE(n == 4);
  CHECK(loss.rfx == doctest::Approx(sum / n).epsilon(1e-9));

  // A batch with no invertible candidate contributes zero.
  Document no_antonym = doc;
  no_antonym.gold_links.clear();
  SpatialLink only_taking;
  only_taking.id = "m2";
  only_taking.type = LinkType::MoveLink;
  only_taking.tm = "se1";
  only_taking.tr = "mo1";
  only_taking.lg = "pl2";
  no_antonym.gold_links.push_back(only_taking);
  std::vector<Document> docs2{no_antonym};
  HybridModel model2 = HybridModel::build(cfg, docs2);
  auto ex2 = build_examples(model2, docs2);
  REQUIRE(ex2.size() == 1);
  nn::Tape tape2;
  BatchLoss loss2 = batch_loss(model2, tape2, ex2);
  CHECK(loss2.rfx == 0.0);
  CHECK(loss2.rfx_instances == 0);
}
