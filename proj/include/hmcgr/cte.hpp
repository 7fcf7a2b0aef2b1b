#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/corpus.hpp"
#include "hmcgr/crf.hpp"
#include "hmcgr/nn/layers.hpp"
#include "hmcgr/tokenizer.hpp"

namespace hmcgr {

// Per-word BIO tags from the two tagging heads: element kinds and spatial
// roles. Both sequences cover the words of one sentence.
struct RoleTagSequence {
  std::vector<int> element_tags;
  std::vector<int> role_tags;

  bool operator==(const RoleTagSequence&) const = default;
};

struct TaggedElement {
  SpatialElement element;
  SpatialRole role = SpatialRole::None;
};

// TM = {trajector, mover}, LG = {landmark, goal}, TR = {trigger}; elements
// with no role are dropped.
struct RolePartition {
  std::vector<SpatialElement> tm;
  std::vector<SpatialElement> lg;
  std::vector<SpatialElement> tr;
};

// Fully instantiated candidate; no slot is ever null by construction.
struct CandidateTriplet {
  std::string doc_id;
  int sentence_id = 0;
  SpatialElement tm, tr, lg;
};

struct LabeledCandidate {
  CandidateTriplet triplet;
  LinkType label = LinkType::Null;
};

// Gold roles are derived from link membership, first link in document order
// wins: QSLINK/OLINK give trajector/landmark, MOVELINK gives mover/goal,
// trigger slots give TRIGGER.
std::map<std::string, SpatialRole> derive_gold_roles(const Document& doc);

inline constexpr int kElementLabelCount = 8;  // ElementKind values
inline constexpr int kRoleLabelCount = 5;     // roles minus NONE

RoleTagSequence gold_tag_sequence(const Document& doc, const Sentence& sentence,
                                  const std::map<std::string, SpatialRole>& roles);

// Rebuilds elements and roles from the two tag sequences. An element whose
// head token (the last of its span) carries no role tag gets role NONE.
std::vector<TaggedElement> elements_from_tags(const Document& doc, const Sentence& sentence,
                                              const RoleTagSequence& tags,
                                              const std::string& id_prefix);

RolePartition partition_roles(std::span<const TaggedElement> elements);

// Exact cartesian product TM x TR x LG in that loop order.
std::vector<CandidateTriplet> enumerate_candidates(const RolePartition& partition,
                                                   const std::string& doc_id, int sentence_id);

// A candidate takes a gold link's type iff all three slots match the link's
// slots by span equality; otherwise NULL. When several gold links match the
// same candidate the first one in document order wins and a warning is
// recorded.
std::vector<LabeledCandidate> label_candidates(std::span<const CandidateTriplet> candidates,
                                               const Document& doc,
                                               std::vector<std::string>* warnings = nullptr);

std::string candidates_to_jsonl(std::span<const LabeledCandidate> candidates);

// Shared encoder feeding the SE (element kind) and SR (spatial role) CRF
// heads. Tagging decodes under BIO transition constraints, so outputs always
// validate.
class RoleTagger {
 public:
  static RoleTagger build(nn::ParamStore& store, SubwordVocab vocab,
                          const nn::EncoderConfig& encoder_cfg, nn::Rng& rng);

  // Word-level states for one sentence: n_words x hidden.
  nn::Node* encode_words(nn::Tape& t, const Document& doc, const Sentence& sentence) const;

  RoleTagSequence tag(const Document& doc, const Sentence& sentence) const;

  // Teacher mode: returns the gold tags after BIO validation; used to build
  // training candidates without decoding.
  RoleTagSequence tag_teacher(const Document& doc, const Sentence& sentence) const;

  // Multi-task NLL: both CRF heads share the single encoder pass.
  nn::Node* loss(nn::Tape& t, const Document& doc, const Sentence& sentence,
                 const RoleTagSequence& gold) const;

  const SubwordVocab& vocab() const { return vocab_; }

 private:
  std::vector<std::string> sentence_words(const Document& doc, const Sentence& s) const;

  SubwordVocab vocab_;
  nn::TransformerEncoder encoder_;
  nn::SpanPooler word_pool_;
  nn::Linear emit_elements_, emit_roles_;
  LinearChainCrf crf_elements_, crf_roles_;
};

}  // namespace hmcgr
