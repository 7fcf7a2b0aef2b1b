#include "hmcgr/cte.hpp"

#include <json.hpp>

namespace hmcgr {

using nn::Node;
using nn::Tape;

std::map<std::string, SpatialRole> derive_gold_roles(const Document& doc) {
  std::map<std::string, SpatialRole> roles;
  auto assign = [&](const std::optional<std::string>& slot, SpatialRole role) {
    if (!slot) return;
    roles.emplace(*slot, role);  // first link in document order wins
  };
  for (const auto& link : doc.gold_links) {
    bool motion = link.type == LinkType::MoveLink;
    assign(link.tm, motion ? SpatialRole::Mover : SpatialRole::Trajector);
    assign(link.tr, SpatialRole::Trigger);
    assign(link.lg, motion ? SpatialRole::Goal : SpatialRole::Landmark);
  }
  return roles;
}

namespace {

int role_label(SpatialRole role) { return static_cast<int>(role); }  // None excluded

}  // namespace

RoleTagSequence gold_tag_sequence(const Document& doc, const Sentence& sentence,
                                  const std::map<std::string, SpatialRole>& roles) {
  int n = sentence.tokens.size();
  std::vector<bio::Span> kind_spans;
  std::vector<bio::Span> role_spans;
  for (const auto& el : doc.elements) {
    if (!sentence.tokens.contains(el.span.begin)) continue;
    bio::Span s;
    s.begin = el.span.begin - sentence.tokens.begin;
    s.end = el.span.end - sentence.tokens.begin;
    s.label = static_cast<int>(el.kind);
    kind_spans.push_back(s);
    auto it = roles.find(el.id);
    if (it != roles.end() && it->second != SpatialRole::None) {
      s.label = role_label(it->second);
      role_spans.push_back(s);
    }
  }
  RoleTagSequence seq;
  seq.element_tags = bio::encode_spans(n, kind_spans);
  seq.role_tags = bio::encode_spans(n, role_spans);
  return seq;
}

std::vector<TaggedElement> elements_from_tags(const Document& doc, const Sentence& sentence,
                                              const RoleTagSequence& tags,
                                              const std::string& id_prefix) {
  std::vector<TaggedElement> out;
  auto kind_spans = bio::decode_tags(tags.element_tags);
  for (std::size_t i = 0; i < kind_spans.size(); ++i) {
    const auto& ks = kind_spans[i];
    TaggedElement te;
    te.element.id = id_prefix + "_s" + std::to_string(sentence.id) + "_e" + std::to_string(i);
    te.element.kind = static_cast<ElementKind>(ks.label);
    te.element.span = {sentence.tokens.begin + ks.begin, sentence.tokens.begin + ks.end};
    te.element.text = doc.surface(te.element.span);

    // The element's role is the role tag covering its head token.
    int head = ks.end - 1;
    int role_tag = tags.role_tags[head];
    int label = bio::label_of(role_tag);
    te.role = label < 0 ? SpatialRole::None : static_cast<SpatialRole>(label);
    out.push_back(std::move(te));
  }
  return out;
}

RolePartition partition_roles(std::span<const TaggedElement> elements) {
  RolePartition p;
  for (const auto& te : elements) {
    switch (te.role) {
      case SpatialRole::Trajector:
      case SpatialRole::Mover:
        p.tm.push_back(te.element);
        break;
      case SpatialRole::Landmark:
      case SpatialRole::Goal:
        p.lg.push_back(te.element);
        break;
      case SpatialRole::Trigger:
        p.tr.push_back(te.element);
        break;
      case SpatialRole::None:
        break;
    }
  }
  return p;
}

std::vector<CandidateTriplet> enumerate_candidates(const RolePartition& partition,
                                                   const std::string& doc_id,
                                                   int sentence_id) {
  std::vector<CandidateTriplet> out;
  out.reserve(partition.tm.size() * partition.tr.size() * partition.lg.size());
  for (const auto& tm : partition.tm)
    for (const auto& tr : partition.tr)
      for (const auto& lg : partition.lg)
        out.push_back({doc_id, sentence_id, tm, tr, lg});
  return out;
}

std::vector<LabeledCandidate> label_candidates(std::span<const CandidateTriplet> candidates,
                                               const Document& doc,
                                               std::vector<std::string>* warnings) {
  std::vector<LabeledCandidate> out;
  out.reserve(candidates.size());
  for (const auto& cand : candidates) {
    LabeledCandidate lc;
    lc.triplet = cand;
    lc.label = LinkType::Null;
    bool matched = false;
    for (const auto& link : doc.gold_links) {
      if (!link.tm || !link.tr || !link.lg) continue;  // null-role links route to GEN
      bool same = doc.element_or_throw(*link.tm).span == cand.tm.span &&
                  doc.element_or_throw(*link.tr).span == cand.tr.span &&
                  doc.element_or_throw(*link.lg).span == cand.lg.span;
      if (!same) continue;
      if (!matched) {
        lc.label = link.type;
        matched = true;
      } else if (warnings) {
        warnings->push_back(doc.doc_id + ": candidate also matches gold link '" + link.id +
                            "'; keeping the first match");
      }
    }
    out.push_back(std::move(lc));
  }
  return out;
}

std::string candidates_to_jsonl(std::span<const LabeledCandidate> candidates) {
  std::string out;
  for (const auto& lc : candidates) {
    nlohmann::json j;
    j["doc_id"] = lc.triplet.doc_id;
    j["sentence_id"] = lc.triplet.sentence_id;
    j["tm_span"] = {lc.triplet.tm.span.begin, lc.triplet.tm.span.end};
    j["tr_span"] = {lc.triplet.tr.span.begin, lc.triplet.tr.span.end};
    j["lg_span"] = {lc.triplet.lg.span.begin, lc.triplet.lg.span.end};
    j["label"] = std::string(to_string(lc.label));
    out += j.dump();
    out += '\n';
  }
  return out;
}

RoleTagger RoleTagger::build(nn::ParamStore& store, SubwordVocab vocab,
                             const nn::EncoderConfig& encoder_cfg, nn::Rng& rng) {
  RoleTagger tagger;
  tagger.vocab_ = std::move(vocab);
  nn::EncoderConfig cfg = encoder_cfg;
  cfg.vocab = tagger.vocab_.size();
  tagger.encoder_ = nn::TransformerEncoder::build(store, "tagger.encoder", cfg, rng);
  tagger.word_pool_ = nn::make_span_pooler(store, "tagger.word_pool", cfg.hidden, rng);
  tagger.emit_elements_ = nn::make_linear(store, "tagger.emit_se", cfg.hidden,
                                          bio::tag_count(kElementLabelCount), rng);
  tagger.emit_roles_ = nn::make_linear(store, "tagger.emit_sr", cfg.hidden,
                                       bio::tag_count(kRoleLabelCount), rng);
  tagger.crf_elements_ =
      LinearChainCrf::build(store, "tagger.crf_se", bio::tag_count(kElementLabelCount), rng);
  tagger.crf_roles_ =
      LinearChainCrf::build(store, "tagger.crf_sr", bio::tag_count(kRoleLabelCount), rng);
  return tagger;
}

std::vector<std::string> RoleTagger::sentence_words(const Document& doc,
                                                    const Sentence& s) const {
  std::vector<std::string> words;
  words.reserve(s.tokens.size());
  for (int i = s.tokens.begin; i < s.tokens.end; ++i) words.push_back(doc.tokens[i].text);
  return words;
}

Node* RoleTagger::encode_words(Tape& t, const Document& doc, const Sentence& sentence) const {
  auto words = sentence_words(doc, sentence);
  if (words.empty()) throw nn::ShapeError("tagger: empty sentence");
  auto enc = vocab_.encode(words);
  Node* pieces = encoder_.encode(t, enc.ids);
  std::vector<Node*> rows;
  rows.reserve(enc.word_pieces.size());
  for (auto [begin, end] : enc.word_pieces) rows.push_back(word_pool_.pool(t, pieces, begin, end));
  return concat_rows(rows);
}

RoleTagSequence RoleTagger::tag(const Document& doc, const Sentence& sentence) const {
  Tape t;
  Node* words = encode_words(t, doc, sentence);
  Node* se_emit = emit_elements_(t, words);
  Node* sr_emit = emit_roles_(t, words);

  auto se_allowed = bio::allowed_transitions(kElementLabelCount);
  auto se_start = bio::allowed_start(kElementLabelCount);
  auto sr_allowed = bio::allowed_transitions(kRoleLabelCount);
  auto sr_start = bio::allowed_start(kRoleLabelCount);

  RoleTagSequence seq;
  seq.element_tags = crf_elements_.viterbi(se_emit->val, &se_allowed, &se_start);
  seq.role_tags = crf_roles_.viterbi(sr_emit->val, &sr_allowed, &sr_start);
  return seq;
}

RoleTagSequence RoleTagger::tag_teacher(const Document& doc, const Sentence& sentence) const {
  RoleTagSequence gold = gold_tag_sequence(doc, sentence, derive_gold_roles(doc));
  if (!bio::valid(gold.element_tags) || !bio::valid(gold.role_tags))
    throw ValidationError(doc.doc_id + ": gold tags fail BIO validation");
  return gold;
}

Node* RoleTagger::loss(Tape& t, const Document& doc, const Sentence& sentence,
                       const RoleTagSequence& gold) const {
  Node* words = encode_words(t, doc, sentence);
  Node* se_nll = crf_elements_.neg_log_likelihood(t, emit_elements_(t, words),
                                                  gold.element_tags);
  Node* sr_nll = crf_roles_.neg_log_likelihood(t, emit_roles_(t, words), gold.role_tags);
  return add(se_nll, sr_nll);
}

}  // namespace hmcgr
