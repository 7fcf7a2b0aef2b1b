#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/analysis.hpp"
#include "hmcgr/corpus.hpp"
#include "hmcgr/nn/autograd.hpp"

namespace hmcgr {

// Graph over one document window (a base sentence plus, when coreference
// reaches outside it, the antecedent sentence). Nodes are the window's
// tokens followed by its elements, each in document order.
struct SpatialGraph {
  std::vector<int> token_nodes;               // document token indices
  std::vector<SpatialElement> element_nodes;  // elements inside the window

  // Binary adjacency per edge type. `boundary`, `coref` and `dependency` are
  // symmetric; `element` is directed container -> contained token.
  nn::Mat boundary;
  nn::Mat element;
  nn::Mat coref;
  nn::Mat dependency;

  int node_count() const {
    return static_cast<int>(token_nodes.size() + element_nodes.size());
  }
  int token_node(int doc_token_index) const;       // -1 when absent
  int element_node(const TokenSpan& span) const;   // -1 when absent

  const nn::Mat& matrix(int edge_type) const;      // 0=B 1=E 2=C 3=D
};

inline constexpr int kEdgeTypes = 4;
inline constexpr std::array<const char*, kEdgeTypes> kEdgeNames{"boundary", "element",
                                                                "coref", "dependency"};

// Applies the four edge rules over all node pairs. Provider failures degrade
// to an all-zero matrix for the affected edge type, with a warning.
SpatialGraph build_graph(const Document& doc, std::span<const int> sentence_ids,
                         std::span<const SpatialElement> elements,
                         const AnalysisProvider& provider,
                         std::vector<std::string>* warnings = nullptr);

// Sentences in the window for a base sentence: the sentence itself plus the
// antecedent sentence of any coreference chain that reaches into it.
std::vector<int> window_sentences(const Document& doc, int base_sentence,
                                  const AnalysisProvider& provider);

// Elementwise weighted merge of the four adjacencies; zero entries of every
// input stay zero. Shapes must agree.
nn::Mat merge_adjacency(const std::array<nn::Mat, kEdgeTypes>& adjacency,
                        const std::array<double, kEdgeTypes>& weights);

// Binary union support of the four matrices (used for normalization).
nn::Mat adjacency_support(const SpatialGraph& graph);

// Symmetric normalizer entries d_i^{-1/2} d_j^{-1/2} with d from the support
// plus self-loops; constant with respect to the edge weights.
nn::Mat symmetric_normalizer(const nn::Mat& support);

}  // namespace hmcgr
