#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/corpus.hpp"
#include "hmcgr/cte.hpp"
#include "hmcgr/nn/autograd.hpp"

namespace hmcgr {

// Trigger -> antonym list, loaded from a UTF-8 TSV file with lines
// `trigger\tantonym1\tantonym2...`. Lookup keys are lowercased; missing
// triggers return an empty list.
class AntonymLexicon {
 public:
  static AntonymLexicon load(const std::string& path);
  static AntonymLexicon from_text(std::string_view tsv);

  const std::vector<std::string>& antonyms(const std::string& trigger) const;
  std::size_t size() const { return table_.size(); }
  std::string to_text() const;

 private:
  std::map<std::string, std::vector<std::string>> table_;
  std::vector<std::string> empty_;
};

// The inverted sentence and what changed: participant spans swapped in
// place, trigger replaced by one antonym. Spans are local to the rebuilt
// word list.
struct InvertedSentence {
  std::vector<std::string> words;
  TokenSpan tm_span;  // where the original lg text now sits
  TokenSpan tr_span;  // antonym
  TokenSpan lg_span;  // where the original tm text now sits
  std::string antonym;

  std::string text() const;
};

// Token-level inversion: spans are word indices into `words`. Overlapping
// spans or a trigger without antonyms make the instance non-invertible.
// Sentence-initial capitalization is preserved at position 0 and removed
// from a capitalized word that moves inward.
std::optional<InvertedSentence> invert_tokens(std::span<const std::string> words, TokenSpan tm,
                                              TokenSpan tr, TokenSpan lg,
                                              const AntonymLexicon& lexicon, nn::Rng& rng);

// Document-level wrapper over a candidate triplet's sentence.
std::optional<InvertedSentence> invert_sentence(const Document& doc,
                                                const CandidateTriplet& candidate,
                                                const AntonymLexicon& lexicon, nn::Rng& rng);

// 1 - cos of the row-mean pooled embeddings; result lies in [0, 2].
nn::Node* rfx_loss(nn::Node* h_ct, nn::Node* h_ivt);

}  // namespace hmcgr
