#include "hmcgr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hmcgr/graph.hpp"
#include "hmcgr/nn/optim.hpp"

namespace hmcgr {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Node;
using nn::Tape;

// ---- HybridModel -------------------------------------------------------------

namespace {

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw TrainingError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TrainingError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int link_home_sentence(const Document& doc, const SpatialLink& link) {
  for (const auto& slot : {link.tr, link.tm, link.lg})
    if (slot) return doc.tokens[doc.element_or_throw(*slot).span.begin].sentence_id;
  throw ValidationError(doc.doc_id + ": link '" + link.id + "' has no filled slot");
}

std::string sentence_gen_target(const Document& doc, int sentence_id,
                                const AnalysisProvider& provider) {
  std::string target;
  for (const auto& link : doc.gold_links) {
    if (link.type == LinkType::Null) continue;
    if (link_home_sentence(doc, link) != sentence_id) continue;
    TargetSentence t = build_target_sentence(link, doc, link_coref_pair(link, doc, provider));
    if (!target.empty()) target += kBlockSeparator;
    target += t.rendered;
  }
  return target;
}

}  // namespace

HybridModel HybridModel::build(const HybridConfig& config, std::span<const Document> docs) {
  std::vector<std::string> words;
  for (const auto& doc : docs)
    for (const auto& tok : doc.tokens) words.push_back(tok.text);

  SubwordVocab mlm = SubwordVocab::build(
      words, {.max_piece_len = 12, .continuation = "##", .prepend_cls = true});
  SubwordVocab s2s = SubwordVocab::build(
      words, {.max_piece_len = 4, .lowercase = true, .word_start = "_"});

  auto provider = make_provider(config.provider);
  std::vector<std::string> target_texts;
  for (const auto& doc : docs)
    for (const auto& sentence : doc.sentences) {
      std::string t = sentence_gen_target(doc, sentence.id, *provider);
      if (!t.empty()) target_texts.push_back(std::move(t));
    }
  WordVocab target = WordVocab::build(target_texts);

  return build_with_vocabs(config, std::move(mlm), std::move(s2s), std::move(target));
}

HybridModel HybridModel::build_with_vocabs(const HybridConfig& config, SubwordVocab mlm,
                                           SubwordVocab s2s, WordVocab target) {
  config.validate();
  HybridModel m;
  m.config_ = config;
  m.store_ = std::make_unique<nn::ParamStore>();
  m.rng_ = std::make_unique<nn::Rng>(config.seed);

  int ffn = config.resolved_ffn();
  nn::EncoderConfig enc_cfg{.vocab = 0,
                            .hidden = config.hidden_size,
                            .heads = config.attention_heads,
                            .layers = config.encoder_layers,
                            .ffn = ffn,
                            .max_positions = config.max_positions};
  m.tagger_ = std::make_unique<RoleTagger>(
      RoleTagger::build(*m.store_, std::move(mlm), enc_cfg, *m.rng_));

  ClsConfig cls_cfg{.hidden = config.hidden_size,
                    .heads = config.attention_heads,
                    .layers = config.encoder_layers,
                    .ffn = ffn,
                    .max_positions = config.max_positions,
                    .gcn_layers = config.gcn_layers,
                    .use_gcn = config.use_gcn,
                    .use_cross_attention = config.use_cross_attention};
  m.cls_ = std::make_unique<ClsModel>(
      ClsModel::build(*m.store_, m.tagger_->vocab(), std::move(s2s), cls_cfg, *m.rng_));

  nn::DecoderConfig dec_cfg{.vocab = 0,
                            .hidden = config.hidden_size,
                            .heads = config.attention_heads,
                            .layers = config.encoder_layers,
                            .ffn = ffn,
                            .max_positions = config.max_decode_len};
  m.gen_ = std::make_unique<GenModel>(
      GenModel::build(*m.store_, std::move(target), dec_cfg, *m.rng_));

  if (!config.lexicon_path.empty()) m.lexicon_ = AntonymLexicon::load(config.lexicon_path);
  m.provider_ = make_provider(config.provider);
  return m;
}

void HybridModel::save(const std::string& dir) const {
  fs::create_directories(dir);
  json cfg = config_.to_json();
  cfg["schema_version"] = kCheckpointSchemaVersion;
  cfg["code_version"] = kCodeVersion;
  auto weights = edge_weight_values_json();
  cfg["edge_weights"] = weights;
  write_file_atomic(fs::path(dir) / "config.json", cfg.dump(2) + "\n");

  json vocabs;
  vocabs["mlm"] = tagger_->vocab().to_json();
  vocabs["s2s"] = cls_->s2s_vocab().to_json();
  vocabs["target"] = gen_->vocab().to_json();
  write_file_atomic(fs::path(dir) / "vocabs.json", vocabs.dump() + "\n");

  std::ostringstream weights_out;
  store_->save(weights_out);
  write_file_atomic(fs::path(dir) / "weights.bin", weights_out.str());
}

nlohmann::json HybridModel::edge_weight_values_json() const {
  json j;
  auto values = cls_->edge_weight_values();
  for (int y = 0; y < kEdgeTypes; ++y) j[kEdgeNames[y]] = values[y];
  return j;
}

HybridModel HybridModel::load(const std::string& dir) {
  json cfg_json;
  try {
    cfg_json = json::parse(read_file(fs::path(dir) / "config.json"));
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint config is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg_json.contains("schema_version") ||
      cfg_json["schema_version"].get<int>() != kCheckpointSchemaVersion)
    throw ConfigError("checkpoint schema version mismatch (expected " +
                      std::to_string(kCheckpointSchemaVersion) + ")");
  cfg_json.erase("schema_version");
  cfg_json.erase("code_version");
  cfg_json.erase("edge_weights");
  HybridConfig config = HybridConfig::from_json(cfg_json);

  json vocabs = json::parse(read_file(fs::path(dir) / "vocabs.json"));
  HybridModel m = build_with_vocabs(config, SubwordVocab::from_json(vocabs.at("mlm")),
                                    SubwordVocab::from_json(vocabs.at("s2s")),
                                    WordVocab::from_json(vocabs.at("target")));
  std::istringstream weights_in(read_file(fs::path(dir) / "weights.bin"));
  m.store_->load(weights_in);
  return m;
}

// ---- training examples -------------------------------------------------------

std::vector<SentenceExample> build_examples(const HybridModel& model,
                                            std::span<const Document> docs) {
  std::vector<SentenceExample> out;
  for (const auto& doc : docs) {
    auto roles = derive_gold_roles(doc);
    for (const auto& sentence : doc.sentences) {
      SentenceExample ex;
      ex.doc = &doc;
      ex.sentence_id = sentence.id;

      std::vector<TaggedElement> tagged;
      for (const auto& el : doc.elements) {
        if (!sentence.tokens.contains(el.span.begin)) continue;
        auto it = roles.find(el.id);
        tagged.push_back({el, it == roles.end() ? SpatialRole::None : it->second});
      }
      auto candidates =
          enumerate_candidates(partition_roles(tagged), doc.doc_id, sentence.id);
      ex.candidates = label_candidates(candidates, doc);
      ex.gen_target = sentence_gen_target(doc, sentence.id, model.provider());

      if (!ex.candidates.empty() || !ex.gen_target.empty()) out.push_back(std::move(ex));
    }
  }
  return out;
}

// ---- batch loss ----------------------------------------------------------------

namespace {

Node* mean_of(Tape& tape, const std::vector<Node*>& scalars) {
  return mean_all(concat_rows(scalars));
}

}  // namespace

BatchLoss batch_loss(HybridModel& model, Tape& tape, std::span<const SentenceExample> batch) {
  const HybridConfig& cfg = model.config();
  std::vector<Node*> logits;
  std::vector<LinkType> labels;
  std::vector<Node*> gen_losses;
  std::vector<Node*> rfx_losses;

  BatchLoss result;

  for (const auto& ex : batch) {
    const Document& doc = *ex.doc;
    const Sentence& sentence = doc.sentences[ex.sentence_id];

    bool want_cls = cfg.use_cls && !ex.candidates.empty();
    bool want_gen = cfg.use_gen && !ex.gen_target.empty();
    bool want_rfx = cfg.use_rfx && !ex.candidates.empty();
    if (!want_cls && !want_gen && !want_rfx) continue;

    DualEncoding enc = model.cls().encode_dual(tape, doc, sentence);

    if (want_cls) {
      auto window = window_sentences(doc, sentence.id, model.provider());
      SpatialGraph graph = build_graph(doc, window, doc.elements, model.provider());
      Node* h_ns = nullptr;
      if (cfg.use_gcn) {
        std::map<int, Node*> words{{sentence.id, enc.cb_words}};
        for (int sid : window) {
          if (sid == sentence.id) continue;
          DualEncoding other = model.cls().encode_dual(tape, doc, doc.sentences[sid]);
          words[sid] = other.cb_words;
        }
        h_ns = model.cls().gcn_fuse(tape, graph,
                                    model.cls().node_features(tape, graph, doc, words));
      }
      for (const auto& lc : ex.candidates) {
        logits.push_back(model.cls().classify_triplet(tape, enc, lc.triplet, sentence,
                                                      &graph, h_ns));
        labels.push_back(lc.label);
      }
    }

    if (want_gen) gen_losses.push_back(model.gen().loss(tape, enc.h_et, ex.gen_target));

    if (want_rfx) {
      for (const auto& lc : ex.candidates) {
        if (cfg.rfx_scope == "gold" && lc.label == LinkType::Null) continue;
        auto ivs = invert_sentence(doc, lc.triplet, model.lexicon(), model.rng());
        if (!ivs) continue;  // non-invertible instances never contribute
        Node* h_ivt = model.cls().encode_seq2seq(tape, ivs->words);
        rfx_losses.push_back(rfx_loss(enc.h_ct, h_ivt));
      }
    }
  }

  Node* total = tape.constant(nn::Mat::Zero(1, 1));
  if (cfg.use_cls && !logits.empty()) {
    Node* l = cls_loss(tape, logits, labels);
    result.cls = nn::scalar_value(l);
    result.cls_candidates = static_cast<int>(logits.size());
    total = add(total, scale(l, cfg.w_cls));
  }
  if (cfg.use_gen && !gen_losses.empty()) {
    Node* l = mean_of(tape, gen_losses);
    result.gen = nn::scalar_value(l);
    total = add(total, scale(l, cfg.w_gen));
  }
  if (cfg.use_rfx && !rfx_losses.empty()) {
    Node* l = mean_of(tape, rfx_losses);
    result.rfx = nn::scalar_value(l);
    result.rfx_instances = static_cast<int>(rfx_losses.size());
    total = add(total, scale(l, cfg.w_rfx));
  }
  result.total = total;
  return result;
}

// ---- training -------------------------------------------------------------------

namespace {

struct Optimizer {
  std::unique_ptr<nn::AdamW> adamw;
  std::unique_ptr<nn::Sgd> sgd;

  static Optimizer make(const HybridConfig& cfg) {
    Optimizer o;
    if (cfg.optimizer_name == "adamw")
      o.adamw = std::make_unique<nn::AdamW>(nn::AdamW::Options{.lr = cfg.learning_rate});
    else
      o.sgd = std::make_unique<nn::Sgd>(cfg.learning_rate);
    return o;
  }
  void step(nn::ParamStore& store) {
    if (adamw) adamw->step(store);
    else sgd->step(store);
  }
};

void dump_diverged_batch(const std::string& out_dir,
                         std::span<const SentenceExample> batch, const BatchLoss& loss,
                         const std::string& phase) {
  json j;
  j["phase"] = phase;
  j["cls"] = loss.cls;
  j["gen"] = loss.gen;
  j["rfx"] = loss.rfx;
  j["sentences"] = json::array();
  for (const auto& ex : batch)
    j["sentences"].push_back({{"doc_id", ex.doc->doc_id}, {"sentence_id", ex.sentence_id}});
  write_file_atomic(fs::path(out_dir) / "diverged_batch.json", j.dump(2) + "\n");
}

}  // namespace

TrainResult train(HybridModel& model, std::span<const Document> train_docs,
                  const std::string& out_dir) {
  const HybridConfig& cfg = model.config();
  fs::create_directories(out_dir);

  // Dev carve-out from the training documents (whole documents).
  std::vector<const Document*> pool;
  for (const auto& d : train_docs) pool.push_back(&d);
  model.rng().shuffle(pool);
  std::size_t n_dev = 0;
  if (cfg.dev_fraction > 0.0 && pool.size() >= 2) {
    n_dev = static_cast<std::size_t>(
        std::llround(cfg.dev_fraction * static_cast<double>(pool.size())));
    n_dev = std::min(n_dev, pool.size() - 1);
  }
  std::vector<Document> dev_docs, fit_docs;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i < n_dev) dev_docs.push_back(*pool[i]);
    else fit_docs.push_back(*pool[i]);
  }

  std::ofstream curve(fs::path(out_dir) / "metrics.csv");
  curve << "phase,epoch,step,loss,cls,gen,rfx,dev_f1\n";

  TrainResult result;
  Optimizer tagger_opt = Optimizer::make(cfg);

  // Stage one: the tagging heads (multi-task CRF objective).
  std::vector<std::pair<const Document*, int>> tagger_sentences;
  for (const auto& doc : fit_docs)
    for (const auto& sentence : doc.sentences)
      if (!sentence.tokens.empty()) tagger_sentences.emplace_back(&doc, sentence.id);

  long step_counter = 0;
  for (int epoch = 0; epoch < cfg.tagger_epochs; ++epoch) {
    model.rng().shuffle(tagger_sentences);
    for (std::size_t at = 0; at < tagger_sentences.size();
         at += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(tagger_sentences.size(),
                                 at + static_cast<std::size_t>(cfg.batch_size));
      model.store().zero_grad();
      Tape tape;
      std::vector<Node*> losses;
      for (std::size_t i = at; i < end; ++i) {
        const auto& [doc, sid] = tagger_sentences[i];
        RoleTagSequence gold = model.tagger().tag_teacher(*doc, doc->sentences[sid]);
        losses.push_back(model.tagger().loss(tape, *doc, doc->sentences[sid], gold));
      }
      if (losses.empty()) continue;
      Node* loss = mean_of(tape, losses);
      double value = nn::scalar_value(loss);
      if (!std::isfinite(value)) {
        write_file_atomic(fs::path(out_dir) / "diverged_batch.json",
                          json{{"phase", "tagger"}, {"epoch", epoch}}.dump(2) + "\n");
        throw TrainingError("tagger loss diverged (non-finite)");
      }
      tape.backward(loss);
      tagger_opt.step(model.store());
      curve << "tagger," << epoch << "," << step_counter++ << "," << value << ",,,\n";
    }
  }

  // Stage two: the joint objective over the enabled branches.
  std::vector<SentenceExample> examples = build_examples(model, fit_docs);
  Optimizer joint_opt = Optimizer::make(cfg);
  int patience_left = cfg.early_stopping_patience;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    model.rng().shuffle(examples);
    double epoch_sum = 0.0;
    int epoch_batches = 0;
    for (std::size_t at = 0; at < examples.size();
         at += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end =
          std::min(examples.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::span<const SentenceExample> batch(examples.data() + at, end - at);

      model.store().zero_grad();
      Tape tape;
      BatchLoss loss = batch_loss(model, tape, batch);
      double value = nn::scalar_value(loss.total);
      if (!std::isfinite(value)) {
        dump_diverged_batch(out_dir, batch, loss, "joint");
        throw TrainingError("joint loss diverged (non-finite); batch dumped to " + out_dir);
      }
      if (loss.total->requires_grad) {
        tape.backward(loss.total);
        joint_opt.step(model.store());
      }
      result.step_losses.push_back(value);
      epoch_sum += value;
      ++epoch_batches;
      curve << "joint," << epoch << "," << step_counter++ << "," << value << "," << loss.cls
            << "," << loss.gen << "," << loss.rfx << ",\n";
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = epoch_batches == 0 ? 0.0 : epoch_sum / epoch_batches;

    if (!dev_docs.empty()) {
      DecodeResult dev = decode(model, dev_docs);
      EvalReport report = evaluate(keys_of(dev.links), dev_docs);
      stats.dev_f1 = report.overall.f1;
      if (stats.dev_f1 > result.best_dev_f1) {
        result.best_dev_f1 = stats.dev_f1;
        result.best_epoch = epoch;
        model.save((fs::path(out_dir) / "best").string());
        patience_left = cfg.early_stopping_patience;
      } else {
        --patience_left;
      }
    }

    model.save((fs::path(out_dir) / "last").string());
    curve << "epoch," << epoch << ",," << stats.mean_loss << ",,,," << stats.dev_f1 << "\n";
    result.epochs.push_back(stats);

    if (!dev_docs.empty() && patience_left <= 0) break;
  }

  if (result.epochs.empty()) model.save((fs::path(out_dir) / "last").string());
  if (dev_docs.empty()) model.save((fs::path(out_dir) / "best").string());
  return result;
}

// ---- decoding ---------------------------------------------------------------------

std::vector<LinkKey> keys_of(std::span<const PredictedLink> links) {
  std::vector<LinkKey> keys;
  keys.reserve(links.size());
  for (const auto& p : links) keys.push_back(p.key);
  return keys;
}

DecodeResult decode(HybridModel& model, std::span<const Document> docs) {
  const HybridConfig& cfg = model.config();
  DecodeResult out;

  for (const auto& doc : docs) {
    Tape tape;  // one evaluation tape per document

    // Detect elements and roles once per sentence.
    std::map<int, std::vector<TaggedElement>> detected;
    std::vector<SpatialElement> all_elements;
    for (const auto& sentence : doc.sentences) {
      if (sentence.tokens.empty()) continue;
      RoleTagSequence tags = model.tagger().tag(doc, sentence);
      auto tagged = elements_from_tags(doc, sentence, tags, doc.doc_id);
      for (const auto& te : tagged) all_elements.push_back(te.element);
      detected[sentence.id] = std::move(tagged);
    }

    std::map<int, DualEncoding> encodings;
    auto encoding_of = [&](int sid) -> DualEncoding& {
      auto it = encodings.find(sid);
      if (it == encodings.end())
        it = encodings.emplace(sid, model.cls().encode_dual(tape, doc, doc.sentences[sid]))
                 .first;
      return it->second;
    };

    std::vector<PredictedLink> cls_links;
    std::vector<PredictedLink> gen_links;

    for (const auto& sentence : doc.sentences) {
      auto det = detected.find(sentence.id);
      if (det == detected.end() || det->second.empty()) continue;

      if (cfg.use_cls) {
        auto candidates = enumerate_candidates(partition_roles(det->second), doc.doc_id,
                                               sentence.id);
        if (!candidates.empty()) {
          DualEncoding& enc = encoding_of(sentence.id);
          auto window = window_sentences(doc, sentence.id, model.provider());
          SpatialGraph graph = build_graph(doc, window, all_elements, model.provider());
          Node* h_ns = nullptr;
          if (cfg.use_gcn) {
            std::map<int, Node*> words;
            for (int sid : window) words[sid] = encoding_of(sid).cb_words;
            h_ns = model.cls().gcn_fuse(tape, graph,
                                        model.cls().node_features(tape, graph, doc, words));
          }
          for (const auto& cand : candidates) {
            Node* logits =
                model.cls().classify_triplet(tape, enc, cand, sentence, &graph, h_ns);
            int pred = 0;
            logits->val.row(0).maxCoeff(&pred);
            auto type = static_cast<LinkType>(pred);
            if (type == LinkType::Null) continue;
            LinkKey key;
            key.doc_id = doc.doc_id;
            key.type = type;
            key.tm = char_span(doc, cand.tm.span);
            key.tr = char_span(doc, cand.tr.span);
            key.lg = char_span(doc, cand.lg.span);
            cls_links.push_back({key, Branch::Cls});
          }
        }
      }

      if (cfg.use_gen) {
        DualEncoding& enc = encoding_of(sentence.id);
        GenDiagnostics diag;
        diag.doc_id = doc.doc_id;
        diag.sentence_id = sentence.id;
        diag.decoded = model.gen().greedy_decode(tape, enc.h_et);

        std::vector<SpatialElement> sentence_elements;
        for (const auto& te : det->second) sentence_elements.push_back(te.element);

        for (const auto& block : split_blocks(diag.decoded)) {
          ++diag.blocks;
          std::string error;
          auto target = parse_target_sentence(block, &error);
          if (!target) {
            diag.failures.push_back(error);
            continue;
          }
          ++diag.parsed;
          auto grounded = ground_target(*target, sentence_elements, &error);
          if (!grounded) {
            diag.failures.push_back(error);
            continue;
          }
          ++diag.grounded;
          LinkKey key;
          key.doc_id = doc.doc_id;
          key.type = grounded->type;
          if (grounded->tm) key.tm = char_span(doc, *grounded->tm);
          if (grounded->tr) key.tr = char_span(doc, *grounded->tr);
          if (grounded->lg) key.lg = char_span(doc, *grounded->lg);
          gen_links.push_back({key, Branch::Gen});
        }
        out.diagnostics.push_back(std::move(diag));
      }
    }

    auto merged = union_links(cls_links, gen_links);
    out.links.insert(out.links.end(), merged.begin(), merged.end());
    auto cls_canon = union_links(cls_links, {});
    auto gen_canon = union_links(gen_links, {});
    out.cls_branch.insert(out.cls_branch.end(), cls_canon.begin(), cls_canon.end());
    out.gen_branch.insert(out.gen_branch.end(), gen_canon.begin(), gen_canon.end());
  }
  return out;
}

// ---- ablation -----------------------------------------------------------------------

std::vector<std::pair<std::string, HybridConfig>> ablation_matrix(const HybridConfig& base) {
  auto with = [&](bool cls, bool gen, bool rfx) {
    HybridConfig c = base;
    c.use_cls = cls;
    c.use_gen = gen;
    c.use_rfx = rfx;
    return c;
  };
  HybridConfig no_gcn = with(true, true, true);
  no_gcn.use_gcn = false;
  HybridConfig no_xatt = with(true, true, true);
  no_xatt.use_cross_attention = false;
  return {{"GEN", with(false, true, false)},
          {"CLS", with(true, false, false)},
          {"GEN+CLS", with(true, true, false)},
          {"GEN+RFX", with(false, true, true)},
          {"CLS+RFX", with(true, false, true)},
          {"full", with(true, true, true)},
          {"w/o GCN", no_gcn},
          {"w/o CrossAtt", no_xatt}};
}

std::vector<AblationRow> run_ablation(const HybridConfig& base,
                                      std::span<const Document> train_docs,
                                      std::span<const Document> test_docs,
                                      const std::string& out_dir) {
  std::vector<AblationRow> rows;
  int index = 0;
  for (const auto& [name, config] : ablation_matrix(base)) {
    std::string run_dir =
        (fs::path(out_dir) / ("ablation_" + std::to_string(index++))).string();
    HybridModel model = HybridModel::build(config, train_docs);
    train(model, train_docs, run_dir);
    DecodeResult decoded = decode(model, test_docs);
    EvalReport report = evaluate(keys_of(decoded.links), test_docs);
    rows.push_back({name, config, report});
  }
  return rows;
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::left << std::setw(14) << "Model" << std::right << std::setw(7) << "P"
      << std::setw(7) << "R" << std::setw(7) << "F1" << "\n";
  for (const auto& row : rows)
    out << std::left << std::setw(14) << row.name << std::right << std::setw(7)
        << row.report.overall.precision << std::setw(7) << row.report.overall.recall
        << std::setw(7) << row.report.overall.f1 << "\n";
  return out.str();
}

}  // namespace hmcgr
