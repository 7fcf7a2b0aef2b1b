#include "hmcgr/gen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>

namespace hmcgr {

using nn::Node;
using nn::Tape;

namespace {

constexpr const char* kPad = "<pad>";

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string slot_surface(const std::optional<std::string>& slot) {
  return slot ? *slot : "null";
}

std::optional<std::string> slot_from_surface(const std::string& s) {
  if (lower(s) == "null") return std::nullopt;
  return s;
}

std::vector<std::string> split_on(const std::string& text, const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t at = 0;
  while (true) {
    std::size_t hit = text.find(sep, at);
    if (hit == std::string::npos) {
      parts.push_back(text.substr(at));
      return parts;
    }
    parts.push_back(text.substr(at, hit - at));
    at = hit + sep.size();
  }
}

}  // namespace

std::string relation_name(LinkType type) {
  switch (type) {
    case LinkType::QsLink: return "qslink";
    case LinkType::OLink: return "olink";
    case LinkType::MoveLink: return "movelink";
    case LinkType::Null: break;
  }
  throw std::invalid_argument("relation_name: NULL links have no target sentence");
}

std::optional<LinkType> relation_from_name(std::string_view name) {
  std::string n = lower(trim(name));
  if (n == "qslink") return LinkType::QsLink;
  if (n == "olink") return LinkType::OLink;
  if (n == "movelink") return LinkType::MoveLink;
  return std::nullopt;
}

std::string render_target(const TargetSentence& t) {
  std::string out;
  if (t.pronoun && t.noun)
    out += "The token ``" + *t.pronoun + "'' stands for ``" + *t.noun + "'', and ";
  out += "<pad> " + t.relation + " <pad> can be describe as following : the first element is <pad> " +
         slot_surface(t.tm_text) + " <pad>, the trigger is <pad> " + slot_surface(t.tr_text) +
         " <pad>, and the second element is <pad> " + slot_surface(t.lg_text) + " <pad>.";
  return out;
}

TargetSentence build_target_sentence(
    const SpatialLink& link, const Document& doc,
    const std::optional<std::pair<std::string, std::string>>& coref_pair) {
  if (link.type == LinkType::Null)
    throw std::invalid_argument("build_target_sentence: link type must not be NULL");
  TargetSentence t;
  if (coref_pair) {
    t.pronoun = coref_pair->first;
    t.noun = coref_pair->second;
  }
  t.relation = relation_name(link.type);
  auto text_of = [&](const std::optional<std::string>& slot) -> std::optional<std::string> {
    if (!slot) return std::nullopt;
    return doc.element_or_throw(*slot).text;
  };
  t.tm_text = text_of(link.tm);
  t.tr_text = text_of(link.tr);
  t.lg_text = text_of(link.lg);
  t.rendered = render_target(t);
  return t;
}

std::optional<std::pair<std::string, std::string>> link_coref_pair(
    const SpatialLink& link, const Document& doc, const AnalysisProvider& provider) {
  std::vector<CorefChain> chains;
  try {
    chains = provider.coreference_chains(doc);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  for (const auto& slot : {link.tm, link.tr, link.lg}) {
    if (!slot) continue;
    const SpatialElement& el = doc.element_or_throw(*slot);
    for (const auto& chain : chains) {
      bool mentions_slot = false;
      for (const auto& span : chain)
        if (span == el.span) mentions_slot = true;
      if (!mentions_slot) continue;
      const TokenSpan* antecedent = nullptr;
      for (const auto& span : chain) {
        if (span.end > el.span.begin) continue;  // must precede the mention
        if (!antecedent || span.end > antecedent->end) antecedent = &span;
      }
      if (antecedent) return std::make_pair(el.text, doc.surface(*antecedent));
    }
  }
  return std::nullopt;
}

std::optional<TargetSentence> parse_target_sentence(const std::string& block,
                                                    std::string* error) {
  auto fail = [&](const std::string& why) -> std::optional<TargetSentence> {
    if (error) *error = why;
    return std::nullopt;
  };

  std::vector<std::string> parts = split_on(block, kPad);
  if (parts.size() != 9)
    return fail("expected 8 pad delimiters, found " + std::to_string(parts.size() - 1));

  TargetSentence t;
  auto rel = relation_from_name(parts[1]);
  if (!rel) return fail("unknown relation name '" + trim(parts[1]) + "'");
  t.relation = relation_name(*rel);
  t.tm_text = slot_from_surface(trim(parts[3]));
  t.tr_text = slot_from_surface(trim(parts[5]));
  t.lg_text = slot_from_surface(trim(parts[7]));
  if (!t.tm_text && !t.tr_text && !t.lg_text) return fail("all three slots are null");

  // Optional referential prefix; garbled prefixes are ignored.
  const std::string& head = parts[0];
  const std::string open = "The token ``";
  if (head.rfind(open, 0) == 0) {
    std::size_t p_end = head.find("''", open.size());
    std::string stands = "'' stands for ``";
    if (p_end != std::string::npos && head.compare(p_end, stands.size(), stands) == 0) {
      std::size_t n_begin = p_end + stands.size();
      std::size_t n_end = head.find("''", n_begin);
      if (n_end != std::string::npos && trim(head.substr(n_end)) == "'', and") {
        t.pronoun = head.substr(open.size(), p_end - open.size());
        t.noun = head.substr(n_begin, n_end - n_begin);
      }
    }
  }

  t.rendered = render_target(t);
  return t;
}

std::vector<std::string> split_blocks(const std::string& decoded) {
  std::vector<std::string> blocks;
  for (auto& b : split_on(decoded, kBlockSeparator)) {
    std::string t = trim(b);
    if (!t.empty()) blocks.push_back(std::move(t));
  }
  return blocks;
}

std::optional<GroundedLink> ground_target(const TargetSentence& target,
                                          std::span<const SpatialElement> elements,
                                          std::string* error) {
  auto fail = [&](const std::string& why) -> std::optional<GroundedLink> {
    if (error) *error = why;
    return std::nullopt;
  };

  GroundedLink out;
  auto rel = relation_from_name(target.relation);
  if (!rel) return fail("unknown relation name '" + target.relation + "'");
  out.type = *rel;

  struct Slot {
    const std::optional<std::string>* text;
    std::optional<TokenSpan>* span;
    const char* name;
  };
  std::array<Slot, 3> slots{Slot{&target.tm_text, &out.tm, "tm"},
                            Slot{&target.tr_text, &out.tr, "tr"},
                            Slot{&target.lg_text, &out.lg, "lg"}};

  std::array<std::vector<TokenSpan>, 3> matches;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!slots[s].text->has_value()) continue;
    for (const auto& el : elements)
      if (el.text == **slots[s].text) matches[s].push_back(el.span);
    if (matches[s].empty())
      return fail(std::string("slot ") + slots[s].name + " text '" + **slots[s].text +
                  "' does not match any element in the sentence");
  }

  std::vector<TokenSpan> grounded;
  // Unique matches first, then ambiguity resolved by distance to what is
  // already grounded.
  for (std::size_t s = 0; s < slots.size(); ++s)
    if (slots[s].text->has_value() && matches[s].size() == 1) {
      *slots[s].span = matches[s][0];
      grounded.push_back(matches[s][0]);
    }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!slots[s].text->has_value() || slots[s].span->has_value()) continue;
    const TokenSpan* best = nullptr;
    double best_cost = 0.0;
    for (const auto& span : matches[s]) {
      double cost = 0.0;
      for (const auto& g : grounded)
        cost += std::abs((span.begin + span.end) / 2.0 - (g.begin + g.end) / 2.0);
      if (!best || cost < best_cost ||
          (cost == best_cost && span.begin < best->begin)) {
        best = &span;
        best_cost = cost;
      }
    }
    *slots[s].span = *best;
    grounded.push_back(*best);
  }
  return out;
}

std::string diagnostics_to_jsonl(std::span<const GenDiagnostics> diags) {
  std::string out;
  for (const auto& d : diags) {
    nlohmann::json j;
    j["doc_id"] = d.doc_id;
    j["sentence_id"] = d.sentence_id;
    j["decoded"] = d.decoded;
    j["blocks"] = d.blocks;
    j["parsed"] = d.parsed;
    j["grounded"] = d.grounded;
    j["failures"] = d.failures;
    out += j.dump();
    out += '\n';
  }
  return out;
}

GenModel GenModel::build(nn::ParamStore& store, WordVocab target_vocab,
                         const nn::DecoderConfig& cfg, nn::Rng& rng) {
  GenModel m;
  m.vocab_ = std::move(target_vocab);
  m.cfg_ = cfg;
  m.cfg_.vocab = m.vocab_.size();
  m.decoder_ = nn::TransformerDecoder::build(store, "gen.decoder", m.cfg_, rng);
  return m;
}

Node* GenModel::loss(Tape& t, Node* memory, const std::string& target_text) const {
  std::vector<int> ids = vocab_.encode(target_text);
  // Targets beyond the decoding cap are truncated, mirroring the cap applied
  // at inference.
  if (static_cast<int>(ids.size()) > cfg_.max_positions - 1)
    ids.resize(static_cast<std::size_t>(cfg_.max_positions - 1));
  std::vector<int> input{WordVocab::kBos};
  input.insert(input.end(), ids.begin(), ids.end());
  std::vector<int> gold = ids;
  gold.push_back(WordVocab::kEos);
  Node* logits = decoder_.forward(t, input, memory);
  return nn::cross_entropy_loss(t, logits, gold);
}

std::string GenModel::greedy_decode(Tape& t, Node* memory) const {
  std::vector<int> ids{WordVocab::kBos};
  for (int step = 0; step < cfg_.max_positions - 1; ++step) {
    Node* logits = decoder_.forward(t, ids, memory);
    int next = 0;
    logits->val.row(logits->rows() - 1).maxCoeff(&next);
    if (next == WordVocab::kEos) break;
    ids.push_back(next);
  }
  return vocab_.decode(ids);
}

}  // namespace hmcgr
