#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/analysis.hpp"
#include "hmcgr/cls.hpp"
#include "hmcgr/config.hpp"
#include "hmcgr/corpus.hpp"
#include "hmcgr/cte.hpp"
#include "hmcgr/eval.hpp"
#include "hmcgr/gen.hpp"
#include "hmcgr/rfx.hpp"

namespace hmcgr {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The trained artifact: tagger, classification branch, generation branch and
// their shared resources, all parameters in one store.
class HybridModel {
 public:
  HybridModel(HybridModel&&) = default;
  HybridModel& operator=(HybridModel&&) = default;

  // Builds vocabularies from the documents, then the model.
  static HybridModel build(const HybridConfig& config, std::span<const Document> docs);
  // Builds around existing vocabularies (checkpoint load path).
  static HybridModel build_with_vocabs(const HybridConfig& config, SubwordVocab mlm,
                                       SubwordVocab s2s, WordVocab target);

  void save(const std::string& dir) const;           // atomic per file
  static HybridModel load(const std::string& dir);   // schema-checked

  const HybridConfig& config() const { return config_; }
  nn::ParamStore& store() { return *store_; }
  RoleTagger& tagger() { return *tagger_; }
  ClsModel& cls() { return *cls_; }
  GenModel& gen() { return *gen_; }
  const AnalysisProvider& provider() const { return *provider_; }
  const AntonymLexicon& lexicon() const { return lexicon_; }
  nn::Rng& rng() { return *rng_; }
  nlohmann::json edge_weight_values_json() const;

 private:
  HybridModel() = default;

  HybridConfig config_;
  std::unique_ptr<nn::ParamStore> store_;
  std::unique_ptr<RoleTagger> tagger_;
  std::unique_ptr<ClsModel> cls_;
  std::unique_ptr<GenModel> gen_;
  AntonymLexicon lexicon_;
  std::unique_ptr<AnalysisProvider> provider_;
  std::unique_ptr<nn::Rng> rng_;
};

// One training sentence with its teacher-derived supervision.
struct SentenceExample {
  const Document* doc = nullptr;
  int sentence_id = 0;
  std::vector<LabeledCandidate> candidates;  // gold-derived, may be empty
  std::string gen_target;                    // empty when the sentence has no links
};

std::vector<SentenceExample> build_examples(const HybridModel& model,
                                            std::span<const Document> docs);

// Joint loss (weighted sum of the enabled branch losses) for one batch of
// sentence examples. Loss components are also reported separately.
struct BatchLoss {
  nn::Node* total = nullptr;
  double cls = 0.0;
  double gen = 0.0;
  double rfx = 0.0;
  int cls_candidates = 0;
  int rfx_instances = 0;
};

BatchLoss batch_loss(HybridModel& model, nn::Tape& tape,
                     std::span<const SentenceExample> batch);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double dev_f1 = -1.0;  // -1 when no dev set
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  std::vector<double> step_losses;
  double best_dev_f1 = -1.0;
  int best_epoch = -1;
};

// Stage one trains the tagger (multi-task CRF loss), stage two optimizes the
// joint objective. Checkpoints land in out_dir ("last" every epoch, "best"
// on dev improvement); loss curves go to out_dir/metrics.csv. A NaN loss
// aborts with a diagnostic dump of the offending batch.
TrainResult train(HybridModel& model, std::span<const Document> train_docs,
                  const std::string& out_dir);

struct DecodeResult {
  std::vector<PredictedLink> links;  // canonical union, deterministic order
  std::vector<PredictedLink> cls_branch;  // canonicalized per-branch predictions
  std::vector<PredictedLink> gen_branch;
  std::vector<GenDiagnostics> diagnostics;
};

// Union decoding: CLS classifies tagger-derived candidates, GEN parses
// greedy decodes; predictions merge as a canonical set.
DecodeResult decode(HybridModel& model, std::span<const Document> docs);

std::vector<LinkKey> keys_of(std::span<const PredictedLink> links);

// Ablation matrix in the published row order: GEN, CLS, GEN+CLS, GEN+RFX,
// CLS+RFX, full, w/o GCN, w/o CrossAtt.
struct AblationRow {
  std::string name;
  HybridConfig config;
  EvalReport report;
};

std::vector<std::pair<std::string, HybridConfig>> ablation_matrix(const HybridConfig& base);

std::vector<AblationRow> run_ablation(const HybridConfig& base,
                                      std::span<const Document> train_docs,
                                      std::span<const Document> test_docs,
                                      const std::string& out_dir);

std::string ablation_table(std::span<const AblationRow> rows);

}  // namespace hmcgr
