#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/analysis.hpp"
#include "hmcgr/corpus.hpp"
#include "hmcgr/nn/layers.hpp"
#include "hmcgr/tokenizer.hpp"

namespace hmcgr {

// Structured natural-language encoding of one link. `rendered` always equals
// render_target() over the other fields; null slots render as the literal
// token "null".
struct TargetSentence {
  std::optional<std::string> pronoun;
  std::optional<std::string> noun;
  std::string relation;  // "qslink" | "olink" | "movelink"
  std::optional<std::string> tm_text;
  std::optional<std::string> tr_text;
  std::optional<std::string> lg_text;
  std::string rendered;

  bool operator==(const TargetSentence&) const = default;
};

inline constexpr const char* kBlockSeparator = " ; ";

std::string relation_name(LinkType type);                       // lowercase
std::optional<LinkType> relation_from_name(std::string_view);   // trimmed, case-insensitive

// Renders the three-part template: optional referential prefix, relation
// name, slotted explanation. The surface form is bit-exact, including the
// published template's "describe".
std::string render_target(const TargetSentence& t);

// Builds the training target for a gold link. The coref pair (pronoun ->
// noun) comes from the analysis provider; when absent the prefix is omitted.
TargetSentence build_target_sentence(const SpatialLink& link, const Document& doc,
                                     const std::optional<std::pair<std::string, std::string>>&
                                         coref_pair);

// Coref pair for a link: the first slot (tm, tr, lg order) whose element is
// a pronoun mention with an antecedent in the provider's chains.
std::optional<std::pair<std::string, std::string>> link_coref_pair(
    const SpatialLink& link, const Document& doc, const AnalysisProvider& provider);

// Inverse of render_target by pad-delimiter scanning: a block must carry
// exactly 8 pad delimiters; the relation name must be known; slots reading
// "null" (any case) become absent; a block whose slots are all null fails.
// A garbled prefix is tolerated.
std::optional<TargetSentence> parse_target_sentence(const std::string& block,
                                                    std::string* error = nullptr);

std::vector<std::string> split_blocks(const std::string& decoded);

// Grounds slot strings to detected element spans by exact surface match;
// ambiguous matches resolve to the occurrence nearest the already-grounded
// slots, leftmost on ties. Fails when a non-null slot matches no element.
struct GroundedLink {
  LinkType type = LinkType::Null;
  std::optional<TokenSpan> tm, tr, lg;
};
std::optional<GroundedLink> ground_target(const TargetSentence& target,
                                          std::span<const SpatialElement> elements,
                                          std::string* error = nullptr);

struct GenDiagnostics {
  std::string doc_id;
  int sentence_id = 0;
  std::string decoded;
  int blocks = 0;
  int parsed = 0;
  int grounded = 0;
  std::vector<std::string> failures;
};

std::string diagnostics_to_jsonl(std::span<const GenDiagnostics> diags);

// Generation branch: a causal decoder over the word-level target vocabulary,
// cross-attending the seq2seq encoder states of the source sentence.
class GenModel {
 public:
  static GenModel build(nn::ParamStore& store, WordVocab target_vocab,
                        const nn::DecoderConfig& cfg, nn::Rng& rng);

  const WordVocab& vocab() const { return vocab_; }
  int max_decode_len() const { return cfg_.max_positions; }

  // Teacher-forced mean token cross-entropy against `target_text`.
  nn::Node* loss(nn::Tape& t, nn::Node* memory, const std::string& target_text) const;

  // Greedy decode until [EOS] or the length cap.
  std::string greedy_decode(nn::Tape& t, nn::Node* memory) const;

 private:
  nn::DecoderConfig cfg_;
  WordVocab vocab_;
  nn::TransformerDecoder decoder_;
};

}  // namespace hmcgr
