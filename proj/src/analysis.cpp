#include "hmcgr/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace hmcgr {

namespace {

bool is_punct_token(const std::string& text) {
  return !text.empty() && !std::isalnum(static_cast<unsigned char>(text[0])) &&
         text[0] != '_' && text[0] != '\'';
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const std::set<std::string>& plural_pronouns() {
  static const std::set<std::string> v{"they", "them", "these", "those"};
  return v;
}

const std::set<std::string>& singular_pronouns() {
  static const std::set<std::string> v{"it", "he", "she", "him", "her", "this"};
  return v;
}

const std::set<std::string>& neutral_pronouns() {
  static const std::set<std::string> v{"who", "whom", "which", "that"};
  return v;
}

bool looks_plural(const std::string& word) {
  std::string w = lower(word);
  if (w == "children" || w == "people" || w == "men" || w == "women" || w == "cattle")
    return true;
  return w.size() > 2 && w.back() == 's' && w[w.size() - 2] != 's';
}

// Element kinds a pronoun may refer back to.
bool referable(ElementKind kind) {
  switch (kind) {
    case ElementKind::SpatialEntity:
    case ElementKind::Place:
    case ElementKind::Path:
    case ElementKind::NonmotionEvent:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<int> RuleBasedProvider::dependency_heads(const Document& doc,
                                                     const Sentence& sentence) const {
  int n = sentence.tokens.size();
  std::vector<int> heads(n, -1);
  if (n == 0) return heads;

  // Chunk boundaries at punctuation; chunk head = last token of the chunk.
  std::vector<std::pair<int, int>> chunks;  // local [begin, end)
  int begin = -1;
  for (int i = 0; i < n; ++i) {
    const std::string& text = doc.tokens[sentence.tokens.begin + i].text;
    if (is_punct_token(text)) {
      if (begin >= 0) chunks.emplace_back(begin, i);
      begin = -1;
    } else if (begin < 0) {
      begin = i;
    }
  }
  if (begin >= 0) chunks.emplace_back(begin, n);

  if (chunks.empty()) {
    // All punctuation: attach everything to the first token.
    for (int i = 1; i < n; ++i) heads[i] = 0;
    return heads;
  }

  int root = chunks[0].second - 1;
  for (auto [cb, ce] : chunks) {
    int head = ce - 1;
    for (int i = cb; i < ce - 1; ++i) heads[i] = head;
    heads[head] = head == root ? -1 : root;
  }
  // Punctuation attaches to the nearest preceding chunk head (or the root).
  int last_head = root;
  for (int i = 0; i < n; ++i) {
    const std::string& text = doc.tokens[sentence.tokens.begin + i].text;
    if (is_punct_token(text)) heads[i] = last_head == i ? root : last_head;
    for (auto [cb, ce] : chunks)
      if (i == ce - 1) last_head = i;
  }
  return heads;
}

std::vector<CorefChain> RuleBasedProvider::coreference_chains(const Document& doc) const {
  std::vector<CorefChain> chains;
  for (const auto& token : doc.tokens) {
    std::string w = lower(token.text);
    bool plural_ok, singular_ok;
    if (neutral_pronouns().contains(w)) {
      plural_ok = singular_ok = true;
    } else if (plural_pronouns().contains(w)) {
      plural_ok = true;
      singular_ok = false;
    } else if (singular_pronouns().contains(w)) {
      plural_ok = false;
      singular_ok = true;
    } else {
      continue;
    }

    const SpatialElement* antecedent = nullptr;
    for (const auto& el : doc.elements) {
      if (el.span.end > token.index) continue;  // must precede the pronoun
      if (!referable(el.kind)) continue;
      bool plural = looks_plural(doc.tokens[el.span.end - 1].text);
      if (plural ? !plural_ok : !singular_ok) continue;
      if (!antecedent || el.span.end > antecedent->span.end) antecedent = &el;
    }
    if (antecedent)
      chains.push_back({antecedent->span, TokenSpan{token.index, token.index + 1}});
  }
  return chains;
}

std::unique_ptr<AnalysisProvider> make_provider(const std::string& name) {
  if (name == "rule") return std::make_unique<RuleBasedProvider>();
  if (name == "none") return std::make_unique<NullProvider>();
  throw std::invalid_argument("unknown analysis provider '" + name + "'");
}

}  // namespace hmcgr
