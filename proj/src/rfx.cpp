#include "hmcgr/rfx.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace hmcgr {

using nn::Node;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool capitalized(const std::string& w) {
  return !w.empty() && std::isupper(static_cast<unsigned char>(w[0]));
}

void set_initial_case(std::string& w, bool upper) {
  if (w.empty()) return;
  w[0] = upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])))
               : static_cast<char>(std::tolower(static_cast<unsigned char>(w[0])));
}

}  // namespace

AntonymLexicon AntonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open antonym lexicon '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

AntonymLexicon AntonymLexicon::from_text(std::string_view tsv) {
  AntonymLexicon lex;
  std::size_t at = 0;
  while (at < tsv.size()) {
    std::size_t nl = tsv.find('\n', at);
    if (nl == std::string_view::npos) nl = tsv.size();
    std::string line(tsv.substr(at, nl - at));
    at = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::size_t fat = 0;
    while (true) {
      std::size_t tab = line.find('\t', fat);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(fat));
        break;
      }
      fields.push_back(line.substr(fat, tab - fat));
      fat = tab + 1;
    }
    if (fields.size() < 2)
      throw CorpusError("antonym lexicon: line needs trigger and at least one antonym: '" +
                        line + "'");
    std::string key = lower(fields[0]);
    auto& list = lex.table_[key];
    for (std::size_t i = 1; i < fields.size(); ++i)
      if (!fields[i].empty()) list.push_back(fields[i]);
  }
  return lex;
}

const std::vector<std::string>& AntonymLexicon::antonyms(const std::string& trigger) const {
  auto it = table_.find(lower(trigger));
  return it == table_.end() ? empty_ : it->second;
}

std::string AntonymLexicon::to_text() const {
  std::string out;
  for (const auto& [key, list] : table_) {
    out += key;
    for (const auto& a : list) {
      out += '\t';
      out += a;
    }
    out += '\n';
  }
  return out;
}

std::string InvertedSentence::text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::optional<InvertedSentence> invert_tokens(std::span<const std::string> words, TokenSpan tm,
                                              TokenSpan tr, TokenSpan lg,
                                              const AntonymLexicon& lexicon, nn::Rng& rng) {
  int n = static_cast<int>(words.size());
  for (const TokenSpan& s : {tm, tr, lg})
    if (s.empty() || s.begin < 0 || s.end > n) return std::nullopt;
  if (tm.overlaps(tr) || tm.overlaps(lg) || tr.overlaps(lg)) return std::nullopt;

  std::string trigger_surface;
  for (int i = tr.begin; i < tr.end; ++i) {
    if (!trigger_surface.empty()) trigger_surface += ' ';
    trigger_surface += words[i];
  }
  const auto& options = lexicon.antonyms(trigger_surface);
  if (options.empty()) return std::nullopt;
  std::string antonym =
      options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(options.size()) - 1))];

  auto slice = [&](TokenSpan s) {
    return std::vector<std::string>(words.begin() + s.begin, words.begin() + s.end);
  };
  std::vector<std::string> tm_words = slice(tm);
  std::vector<std::string> lg_words = slice(lg);
  std::vector<std::string> tr_words = split_words(antonym);

  struct Replacement {
    TokenSpan at;
    std::vector<std::string> with;
    TokenSpan* out_span;
  };
  InvertedSentence ivs;
  ivs.antonym = antonym;
  std::vector<Replacement> reps{{tm, lg_words, &ivs.tm_span},
                                {tr, tr_words, &ivs.tr_span},
                                {lg, tm_words, &ivs.lg_span}};
  std::sort(reps.begin(), reps.end(),
            [](const Replacement& a, const Replacement& b) { return a.at.begin < b.at.begin; });

  bool initial_was_capitalized = capitalized(words[0]);
  bool initial_replaced = false;
  int at = 0;
  for (const auto& rep : reps) {
    for (int i = at; i < rep.at.begin; ++i) ivs.words.push_back(words[i]);
    int begin = static_cast<int>(ivs.words.size());
    for (const auto& w : rep.with) ivs.words.push_back(w);
    *rep.out_span = {begin, static_cast<int>(ivs.words.size())};
    if (rep.at.begin == 0) initial_replaced = true;
    at = rep.at.end;
  }
  for (int i = at; i < n; ++i) ivs.words.push_back(words[i]);

  // Sentence-initial position keeps its capitalization; a capitalized
  // participant moved inward loses it.
  if (initial_replaced && initial_was_capitalized) {
    set_initial_case(ivs.words[0], true);
    if (tm.begin == 0 || lg.begin == 0) {
      TokenSpan landed = tm.begin == 0 ? ivs.lg_span : ivs.tm_span;
      if (landed.begin > 0 && capitalized(ivs.words[landed.begin]))
        set_initial_case(ivs.words[landed.begin], false);
    }
  }

  return ivs;
}

std::optional<InvertedSentence> invert_sentence(const Document& doc,
                                                const CandidateTriplet& candidate,
                                                const AntonymLexicon& lexicon, nn::Rng& rng) {
  TokenSpan sentence = doc.sentence_span(candidate.sentence_id);
  std::vector<std::string> words;
  for (int i = sentence.begin; i < sentence.end; ++i) words.push_back(doc.tokens[i].text);
  auto local = [&](TokenSpan s) {
    return TokenSpan{s.begin - sentence.begin, s.end - sentence.begin};
  };
  return invert_tokens(words, local(candidate.tm.span), local(candidate.tr.span),
                       local(candidate.lg.span), lexicon, rng);
}

Node* rfx_loss(Node* h_ct, Node* h_ivt) {
  Node* pooled_ct = mean_rows(h_ct);
  Node* pooled_ivt = mean_rows(h_ivt);
  Node* cos = cosine_similarity(pooled_ct, pooled_ivt);
  return add_scalar(scale(cos, -1.0), 1.0);
}

}  // namespace hmcgr
