#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hmcgr/corpus.hpp"

namespace hmcgr {

// Mentions are document-level token spans; a chain groups coreferent
// mentions.
using CorefChain = std::vector<TokenSpan>;

// Pluggable linguistic analysis used by the spatial graph: dependency heads
// and coreference chains. Production setups would back this with a real
// parser; the rule-based implementation below keeps the pipeline and tests
// self-contained.
class AnalysisProvider {
 public:
  virtual ~AnalysisProvider() = default;

  // One head per token of the sentence, as sentence-local indices; -1 marks
  // the root.
  virtual std::vector<int> dependency_heads(const Document& doc,
                                            const Sentence& sentence) const = 0;

  virtual std::vector<CorefChain> coreference_chains(const Document& doc) const = 0;

  virtual std::string name() const = 0;
};

// Deterministic heuristics:
//  - dependency: the sentence splits into punctuation-delimited chunks; every
//    token attaches to its chunk's last token, chunk heads attach to the
//    first chunk's head (the root), punctuation attaches to the preceding
//    chunk head.
//  - coreference: a pronoun links to the nearest preceding annotated
//    element with compatible grammatical number.
class RuleBasedProvider : public AnalysisProvider {
 public:
  std::vector<int> dependency_heads(const Document& doc,
                                    const Sentence& sentence) const override;
  std::vector<CorefChain> coreference_chains(const Document& doc) const override;
  std::string name() const override { return "rule"; }
};

// Produces no analysis; every provider-backed edge type degrades to empty.
class NullProvider : public AnalysisProvider {
 public:
  std::vector<int> dependency_heads(const Document& doc,
                                    const Sentence& sentence) const override {
    return std::vector<int>(sentence.tokens.size(), -1);
  }
  std::vector<CorefChain> coreference_chains(const Document&) const override { return {}; }
  std::string name() const override { return "none"; }
};

std::unique_ptr<AnalysisProvider> make_provider(const std::string& name);

}  // namespace hmcgr
