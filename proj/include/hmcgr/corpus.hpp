#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hmcgr {

enum class ElementKind {
  SpatialEntity,
  Place,
  Path,
  Motion,
  SpatialSignal,
  MotionSignal,
  Measure,
  NonmotionEvent,
};

enum class SpatialRole { Trajector, Mover, Landmark, Goal, Trigger, None };

enum class LinkType { QsLink, OLink, MoveLink, Null };

std::string_view to_string(ElementKind k);
std::string_view to_string(SpatialRole r);
std::string_view to_string(LinkType t);
ElementKind element_kind_from_string(std::string_view s);
SpatialRole spatial_role_from_string(std::string_view s);
LinkType link_type_from_string(std::string_view s);

struct Token {
  std::string text;
  int index = 0;       // ordinal within the document
  int char_start = 0;  // [char_start, char_end) into the raw text
  int char_end = 0;
  int sentence_id = 0;

  bool operator==(const Token&) const = default;
};

// Half-open range of document token indices.
struct TokenSpan {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(int token_index) const { return token_index >= begin && token_index < end; }
  bool overlaps(const TokenSpan& other) const { return begin < other.end && other.begin < end; }
  bool operator==(const TokenSpan&) const = default;
};

struct Sentence {
  int id = 0;
  TokenSpan tokens;

  bool operator==(const Sentence&) const = default;
};

struct SpatialElement {
  std::string id;
  ElementKind kind = ElementKind::SpatialEntity;
  TokenSpan span;
  std::string text;  // raw surface form covering the span

  bool operator==(const SpatialElement&) const = default;
};

// A typed relation over three optional role slots holding element ids.
// MOVELINK slots read (mover, trigger, goal); QSLINK/OLINK slots read
// (trajector, trigger, landmark).
struct SpatialLink {
  std::string id;
  LinkType type = LinkType::Null;
  std::optional<std::string> tm;
  std::optional<std::string> tr;
  std::optional<std::string> lg;

  bool null_role() const { return !tm || !tr || !lg; }
  bool operator==(const SpatialLink&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::vector<SpatialElement> elements;
  std::vector<SpatialLink> gold_links;

  const SpatialElement* element(std::string_view id) const;
  const SpatialElement& element_or_throw(std::string_view id) const;
  TokenSpan sentence_span(int sentence_id) const;
  int sentence_of(const TokenSpan& span) const;
  std::string surface(const TokenSpan& span) const;  // tokens joined by single spaces

  bool operator==(const Document&) const = default;
};

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a link references a missing element, an element span is
// malformed, or any other document invariant fails.
struct ValidationError : CorpusError {
  using CorpusError::CorpusError;
};

// Whitespace + punctuation tokenization with sentence segmentation.
// A token is a maximal run of [A-Za-z0-9_'] or a single other non-space
// character. Sentences end at . ! ? unless the next letter is lowercase.
std::vector<Token> tokenize(std::string_view text);
std::vector<Sentence> collect_sentences(const std::vector<Token>& tokens);

// Parses one annotated XML document. Annotation offsets that do not align
// with token boundaries are snapped to the smallest covering token span and
// reported through `warnings`. Throws xml::ParseError for malformed input
// and ValidationError for dangling references or invariant violations.
Document parse_corpus_xml(std::string_view xml_bytes, std::string_view fallback_doc_id,
                          std::vector<std::string>* warnings = nullptr);

// Canonical interchange format: one JSON object per document with the fixed
// field names doc_id, tokens[], elements[], links[].
std::string to_jsonl(const Document& doc);
Document from_jsonl(std::string_view line);
std::string corpus_to_jsonl(std::span<const Document> docs);
std::vector<Document> corpus_from_jsonl(std::string_view text);

void validate_document(const Document& doc);

struct SplitResult {
  std::vector<Document> train;
  std::vector<Document> test;
};

// Deterministic whole-document split; |train| = round(ratio * n).
SplitResult split_dataset(std::vector<Document> documents, double ratio, std::uint64_t seed);

struct LinkHistogram {
  // Indexed by LinkType order: QSLINK, OLINK, MOVELINK, NULL.
  std::array<int, 4> by_type{};
  std::array<int, 4> null_role_by_type{};
  int total = 0;
  int null_role_total = 0;

  int count(LinkType t) const { return by_type[static_cast<int>(t)]; }
  double null_role_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(null_role_total) / total;
  }
};

LinkHistogram count_links(std::span<const Document> documents);

}  // namespace hmcgr
