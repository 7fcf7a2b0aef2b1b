#include "hmcgr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hmcgr/xml.hpp"

namespace hmcgr {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<std::string_view, ElementKind>, 8> kKindNames{{
    {"SPATIAL_ENTITY", ElementKind::SpatialEntity},
    {"PLACE", ElementKind::Place},
    {"PATH", ElementKind::Path},
    {"MOTION", ElementKind::Motion},
    {"SPATIAL_SIGNAL", ElementKind::SpatialSignal},
    {"MOTION_SIGNAL", ElementKind::MotionSignal},
    {"MEASURE", ElementKind::Measure},
    {"NONMOTION_EVENT", ElementKind::NonmotionEvent},
}};

constexpr std::array<std::pair<std::string_view, SpatialRole>, 6> kRoleNames{{
    {"TRAJECTOR", SpatialRole::Trajector},
    {"MOVER", SpatialRole::Mover},
    {"LANDMARK", SpatialRole::Landmark},
    {"GOAL", SpatialRole::Goal},
    {"TRIGGER", SpatialRole::Trigger},
    {"NONE", SpatialRole::None},
}};

constexpr std::array<std::pair<std::string_view, LinkType>, 4> kLinkNames{{
    {"QSLINK", LinkType::QsLink},
    {"OLINK", LinkType::OLink},
    {"MOVELINK", LinkType::MoveLink},
    {"NULL", LinkType::Null},
}};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

}  // namespace

std::string_view to_string(ElementKind k) {
  for (auto [name, kind] : kKindNames)
    if (kind == k) return name;
  return "SPATIAL_ENTITY";
}

std::string_view to_string(SpatialRole r) {
  for (auto [name, role] : kRoleNames)
    if (role == r) return name;
  return "NONE";
}

std::string_view to_string(LinkType t) {
  for (auto [name, type] : kLinkNames)
    if (type == t) return name;
  return "NULL";
}

ElementKind element_kind_from_string(std::string_view s) {
  for (auto [name, kind] : kKindNames)
    if (name == s) return kind;
  throw CorpusError("unknown element kind '" + std::string(s) + "'");
}

SpatialRole spatial_role_from_string(std::string_view s) {
  for (auto [name, role] : kRoleNames)
    if (name == s) return role;
  throw CorpusError("unknown spatial role '" + std::string(s) + "'");
}

LinkType link_type_from_string(std::string_view s) {
  for (auto [name, type] : kLinkNames)
    if (name == s) return type;
  throw CorpusError("unknown link type '" + std::string(s) + "'");
}

const SpatialElement* Document::element(std::string_view id) const {
  for (const auto& el : elements)
    if (el.id == id) return &el;
  return nullptr;
}

const SpatialElement& Document::element_or_throw(std::string_view id) const {
  const SpatialElement* el = element(id);
  if (!el) throw ValidationError("unknown element id '" + std::string(id) + "'");
  return *el;
}

TokenSpan Document::sentence_span(int sentence_id) const {
  for (const auto& s : sentences)
    if (s.id == sentence_id) return s.tokens;
  throw ValidationError("unknown sentence id " + std::to_string(sentence_id));
}

int Document::sentence_of(const TokenSpan& span) const {
  if (span.empty() || span.begin < 0 || span.end > static_cast<int>(tokens.size()))
    throw ValidationError("token span out of range");
  return tokens[span.begin].sentence_id;
}

std::string Document::surface(const TokenSpan& span) const {
  std::string out;
  for (int i = span.begin; i < span.end; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (word_char(c)) {
      while (i < text.size() && word_char(text[i])) ++i;
    } else {
      ++i;
    }
    Token t;
    t.text = std::string(text.substr(start, i - start));
    t.index = static_cast<int>(tokens.size());
    t.char_start = static_cast<int>(start);
    t.char_end = static_cast<int>(i);
    tokens.push_back(std::move(t));
  }

  // Sentence segmentation: . ! ? end a sentence unless the next letter in the
  // stream is lowercase.
  int sentence = 0;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    tokens[k].sentence_id = sentence;
    const std::string& tok = tokens[k].text;
    bool terminal = tok == "." || tok == "!" || tok == "?";
    if (terminal && k + 1 < tokens.size()) {
      char next = tokens[k + 1].text[0];
      if (!std::islower(static_cast<unsigned char>(next))) ++sentence;
    }
  }
  return tokens;
}

std::vector<Sentence> collect_sentences(const std::vector<Token>& tokens) {
  std::vector<Sentence> sentences;
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (sentences.empty() || sentences.back().id != tokens[i].sentence_id) {
      Sentence s;
      s.id = tokens[i].sentence_id;
      s.tokens = {i, i + 1};
      sentences.push_back(s);
    } else {
      sentences.back().tokens.end = i + 1;
    }
  }
  return sentences;
}

namespace {

// Snaps [char_start, char_end) to the smallest covering token span.
TokenSpan snap_to_tokens(const std::vector<Token>& tokens, int char_start, int char_end,
                         const std::string& what, std::vector<std::string>* warnings) {
  TokenSpan span{-1, -1};
  for (const auto& t : tokens) {
    if (t.char_end <= char_start) continue;
    if (t.char_start >= char_end) break;
    if (span.begin < 0) span.begin = t.index;
    span.end = t.index + 1;
  }
  if (span.begin < 0)
    throw ValidationError(what + ": offsets [" + std::to_string(char_start) + "," +
                          std::to_string(char_end) + ") cover no token");
  bool aligned = tokens[span.begin].char_start == char_start &&
                 tokens[span.end - 1].char_end == char_end;
  if (!aligned && warnings) {
    warnings->push_back(what + ": snapped [" + std::to_string(char_start) + "," +
                        std::to_string(char_end) + ") to token span [" +
                        std::to_string(tokens[span.begin].char_start) + "," +
                        std::to_string(tokens[span.end - 1].char_end) + ")");
  }
  return span;
}

int attr_int(const xml::Element& el, std::string_view name) {
  const std::string* v = el.attribute(name);
  if (!v) throw ValidationError("<" + el.tag + ">: missing attribute '" + std::string(name) + "'");
  try {
    return std::stoi(*v);
  } catch (...) {
    throw ValidationError("<" + el.tag + ">: attribute '" + std::string(name) +
                          "' is not an integer");
  }
}

std::optional<std::string> attr_ref(const xml::Element& el, std::string_view name) {
  const std::string* v = el.attribute(name);
  if (!v || v->empty()) return std::nullopt;
  return *v;
}

bool is_element_tag(const std::string& tag) {
  for (auto [name, kind] : kKindNames)
    if (name == tag) return true;
  return false;
}

}  // namespace

Document parse_corpus_xml(std::string_view xml_bytes, std::string_view fallback_doc_id,
                          std::vector<std::string>* warnings) {
  xml::Element root = xml::parse(xml_bytes);

  Document doc;
  if (const std::string* id = root.attribute("id"); id && !id->empty())
    doc.doc_id = *id;
  else
    doc.doc_id = std::string(fallback_doc_id);

  std::string text;
  if (const xml::Element* t = root.child("TEXT")) text = t->text;
  doc.tokens = tokenize(text);
  doc.sentences = collect_sentences(doc.tokens);

  const xml::Element* tags = root.child("TAGS");
  if (tags) {
    for (const auto& node : tags->children) {
      if (!is_element_tag(node.tag)) continue;
      SpatialElement el;
      const std::string* id = node.attribute("id");
      if (!id || id->empty())
        throw ValidationError("<" + node.tag + ">: element requires an id");
      el.id = *id;
      el.kind = element_kind_from_string(node.tag);
      int start = attr_int(node, "start");
      int end = attr_int(node, "end");
      if (start >= end)
        throw ValidationError("element '" + el.id + "': empty character span");
      el.span = snap_to_tokens(doc.tokens, start, end, "element '" + el.id + "'", warnings);
      el.text = text.substr(doc.tokens[el.span.begin].char_start,
                            doc.tokens[el.span.end - 1].char_end -
                                doc.tokens[el.span.begin].char_start);
      doc.elements.push_back(std::move(el));
    }
    for (const auto& node : tags->children) {
      LinkType type;
      if (node.tag == "QSLINK") type = LinkType::QsLink;
      else if (node.tag == "OLINK") type = LinkType::OLink;
      else if (node.tag == "MOVELINK") type = LinkType::MoveLink;
      else continue;

      SpatialLink link;
      link.type = type;
      if (const std::string* id = node.attribute("id")) link.id = *id;
      if (link.id.empty())
        link.id = "link" + std::to_string(doc.gold_links.size());
      if (type == LinkType::MoveLink) {
        link.tm = attr_ref(node, "mover");
        link.tr = attr_ref(node, "trigger");
        link.lg = attr_ref(node, "goal");
      } else {
        link.tm = attr_ref(node, "trajector");
        link.tr = attr_ref(node, "trigger");
        link.lg = attr_ref(node, "landmark");
      }
      doc.gold_links.push_back(std::move(link));
    }
  }

  validate_document(doc);
  return doc;
}

void validate_document(const Document& doc) {
  const auto& tokens = doc.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.char_start >= t.char_end)
      throw ValidationError(doc.doc_id + ": token " + std::to_string(i) + " has an empty span");
    if (t.index != static_cast<int>(i))
      throw ValidationError(doc.doc_id + ": token index out of order at " + std::to_string(i));
    if (i > 0) {
      if (tokens[i - 1].char_end > t.char_start)
        throw ValidationError(doc.doc_id + ": overlapping tokens at " + std::to_string(i));
      if (tokens[i - 1].sentence_id > t.sentence_id ||
          t.sentence_id > tokens[i - 1].sentence_id + 1)
        throw ValidationError(doc.doc_id + ": non-monotonic sentence ids at " + std::to_string(i));
    }
  }

  for (const auto& el : doc.elements) {
    if (el.span.empty() || el.span.begin < 0 || el.span.end > static_cast<int>(tokens.size()))
      throw ValidationError(doc.doc_id + ": element '" + el.id + "' has an invalid span");
    if (tokens[el.span.begin].sentence_id != tokens[el.span.end - 1].sentence_id)
      throw ValidationError(doc.doc_id + ": element '" + el.id + "' crosses a sentence boundary");
    for (const auto& other : doc.elements) {
      if (&other != &el && other.id == el.id)
        throw ValidationError(doc.doc_id + ": duplicate element id '" + el.id + "'");
    }
  }

  for (const auto& link : doc.gold_links) {
    for (const auto& slot : {link.tm, link.tr, link.lg}) {
      if (slot && !doc.element(*slot))
        throw ValidationError(doc.doc_id + ": link '" + link.id +
                              "' references unknown element '" + *slot + "'");
    }
    if (link.type != LinkType::Null && !link.tm && !link.tr && !link.lg)
      throw ValidationError(doc.doc_id + ": link '" + link.id + "' has no filled slot");
  }
}

namespace {

json token_to_json(const Token& t) {
  return json{{"text", t.text},
              {"start", t.char_start},
              {"end", t.char_end},
              {"sentence", t.sentence_id}};
}

json slot_to_json(const std::optional<std::string>& slot) {
  if (!slot) return nullptr;
  return *slot;
}

std::optional<std::string> slot_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace

std::string to_jsonl(const Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["tokens"] = json::array();
  for (const auto& t : doc.tokens) j["tokens"].push_back(token_to_json(t));
  j["elements"] = json::array();
  for (const auto& el : doc.elements) {
    j["elements"].push_back(json{{"id", el.id},
                                 {"kind", std::string(to_string(el.kind))},
                                 {"start_token", el.span.begin},
                                 {"end_token", el.span.end},
                                 {"text", el.text}});
  }
  j["links"] = json::array();
  for (const auto& link : doc.gold_links) {
    j["links"].push_back(json{{"id", link.id},
                              {"type", std::string(to_string(link.type))},
                              {"tm", slot_to_json(link.tm)},
                              {"tr", slot_to_json(link.tr)},
                              {"lg", slot_to_json(link.lg)}});
  }
  return j.dump();
}

Document from_jsonl(std::string_view line) {
  json j = json::parse(line);
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  int index = 0;
  for (const auto& tj : j.at("tokens")) {
    Token t;
    t.text = tj.at("text").get<std::string>();
    t.char_start = tj.at("start").get<int>();
    t.char_end = tj.at("end").get<int>();
    t.sentence_id = tj.at("sentence").get<int>();
    t.index = index++;
    doc.tokens.push_back(std::move(t));
  }
  doc.sentences = collect_sentences(doc.tokens);
  for (const auto& ej : j.at("elements")) {
    SpatialElement el;
    el.id = ej.at("id").get<std::string>();
    el.kind = element_kind_from_string(ej.at("kind").get<std::string>());
    el.span = {ej.at("start_token").get<int>(), ej.at("end_token").get<int>()};
    el.text = ej.at("text").get<std::string>();
    doc.elements.push_back(std::move(el));
  }
  for (const auto& lj : j.at("links")) {
    SpatialLink link;
    link.id = lj.at("id").get<std::string>();
    link.type = link_type_from_string(lj.at("type").get<std::string>());
    link.tm = slot_from_json(lj.at("tm"));
    link.tr = slot_from_json(lj.at("tr"));
    link.lg = slot_from_json(lj.at("lg"));
    doc.gold_links.push_back(std::move(link));
  }
  validate_document(doc);
  return doc;
}

std::string corpus_to_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& doc : docs) {
    out += to_jsonl(doc);
    out += '\n';
  }
  return out;
}

std::vector<Document> corpus_from_jsonl(std::string_view text) {
  std::vector<Document> docs;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos)
      docs.push_back(from_jsonl(line));
    pos = nl + 1;
  }
  return docs;
}

SplitResult split_dataset(std::vector<Document> documents, double ratio, std::uint64_t seed) {
  if (documents.size() < 2)
    throw CorpusError("split_dataset requires at least 2 documents");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw CorpusError("split ratio must lie in (0, 1)");

  std::vector<std::size_t> order(documents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(documents.size())));
  n = std::clamp<std::size_t>(n, 1, documents.size() - 1);

  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n);
  std::vector<std::size_t> test_idx(order.begin() + n, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  SplitResult out;
  for (std::size_t i : train_idx) out.train.push_back(documents[i]);
  for (std::size_t i : test_idx) out.test.push_back(documents[i]);
  return out;
}

LinkHistogram count_links(std::span<const Document> documents) {
  LinkHistogram h;
  for (const auto& doc : documents) {
    for (const auto& link : doc.gold_links) {
      int t = static_cast<int>(link.type);
      ++h.by_type[t];
      ++h.total;
      if (link.null_role()) {
        ++h.null_role_by_type[t];
        ++h.null_role_total;
      }
    }
  }
  return h;
}

}  // namespace hmcgr
