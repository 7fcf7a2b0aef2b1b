#include "hmcgr/graph.hpp"

#include <algorithm>
#include <set>

namespace hmcgr {

using nn::Mat;

int SpatialGraph::token_node(int doc_token_index) const {
  for (std::size_t i = 0; i < token_nodes.size(); ++i)
    if (token_nodes[i] == doc_token_index) return static_cast<int>(i);
  return -1;
}

int SpatialGraph::element_node(const TokenSpan& span) const {
  for (std::size_t i = 0; i < element_nodes.size(); ++i)
    if (element_nodes[i].span == span)
      return static_cast<int>(token_nodes.size() + i);
  return -1;
}

const Mat& SpatialGraph::matrix(int edge_type) const {
  switch (edge_type) {
    case 0: return boundary;
    case 1: return element;
    case 2: return coref;
    case 3: return dependency;
    default: throw std::out_of_range("edge type");
  }
}

std::vector<int> window_sentences(const Document& doc, int base_sentence,
                                  const AnalysisProvider& provider) {
  std::set<int> ids{base_sentence};
  std::vector<CorefChain> chains;
  try {
    chains = provider.coreference_chains(doc);
  } catch (const std::exception&) {
    chains.clear();
  }
  for (const auto& chain : chains) {
    bool touches = false;
    for (const auto& span : chain)
      if (!span.empty() && doc.tokens[span.begin].sentence_id == base_sentence) touches = true;
    if (!touches) continue;
    for (const auto& span : chain)
      if (!span.empty()) ids.insert(doc.tokens[span.begin].sentence_id);
  }
  return {ids.begin(), ids.end()};
}

SpatialGraph build_graph(const Document& doc, std::span<const int> sentence_ids,
                         std::span<const SpatialElement> elements,
                         const AnalysisProvider& provider,
                         std::vector<std::string>* warnings) {
  SpatialGraph g;
  std::set<int> in_window(sentence_ids.begin(), sentence_ids.end());
  for (const auto& t : doc.tokens)
    if (in_window.contains(t.sentence_id)) g.token_nodes.push_back(t.index);
  for (const auto& el : elements)
    if (in_window.contains(doc.tokens[el.span.begin].sentence_id))
      g.element_nodes.push_back(el);

  int n = g.node_count();
  int n_tokens = static_cast<int>(g.token_nodes.size());
  g.boundary.setZero(n, n);
  g.element.setZero(n, n);
  g.coref.setZero(n, n);
  g.dependency.setZero(n, n);

  auto sentence_of_node = [&](int node) {
    if (node < n_tokens) return doc.tokens[g.token_nodes[node]].sentence_id;
    const auto& el = g.element_nodes[node - n_tokens];
    return doc.tokens[el.span.begin].sentence_id;
  };

  // Boundary: undirected edge between any two nodes of the same sentence.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sentence_of_node(i) == sentence_of_node(j)) {
        g.boundary(i, j) = 1.0;
        g.boundary(j, i) = 1.0;
      }

  // Element: directed edge from each element to every token it contains.
  for (std::size_t e = 0; e < g.element_nodes.size(); ++e) {
    int enode = n_tokens + static_cast<int>(e);
    const auto& span = g.element_nodes[e].span;
    for (int tok = span.begin; tok < span.end; ++tok) {
      int tnode = g.token_node(tok);
      if (tnode >= 0) g.element(enode, tnode) = 1.0;
    }
  }

  // Coreference: symmetric edges among the mentions of each chain. A mention
  // maps to the element node with exactly its span when one exists, else to
  // its token node(s).
  try {
    auto mention_nodes = [&](const TokenSpan& span) {
      std::vector<int> nodes;
      int enode = g.element_node(span);
      if (enode >= 0) {
        nodes.push_back(enode);
        return nodes;
      }
      for (int tok = span.begin; tok < span.end; ++tok) {
        int tnode = g.token_node(tok);
        if (tnode >= 0) nodes.push_back(tnode);
      }
      return nodes;
    };
    for (const auto& chain : provider.coreference_chains(doc)) {
      for (std::size_t a = 0; a < chain.size(); ++a) {
        for (std::size_t b = a + 1; b < chain.size(); ++b) {
          for (int na : mention_nodes(chain[a])) {
            for (int nb : mention_nodes(chain[b])) {
              if (na == nb) continue;
              g.coref(na, nb) = 1.0;
              g.coref(nb, na) = 1.0;
            }
          }
        }
      }
    }
  } catch (const std::exception& e) {
    g.coref.setZero(n, n);
    if (warnings)
      warnings->push_back(doc.doc_id + ": coreference provider failed (" + e.what() +
                          "); coref edges dropped");
  }

  // Dependency: symmetric edges between sibling tokens (same parent).
  try {
    for (const auto& sentence : doc.sentences) {
      if (!in_window.contains(sentence.id)) continue;
      auto heads = provider.dependency_heads(doc, sentence);
      int len = sentence.tokens.size();
      if (static_cast<int>(heads.size()) != len)
        throw std::runtime_error("head count mismatch");
      for (int i = 0; i < len; ++i) {
        for (int j = i + 1; j < len; ++j) {
          if (heads[i] != heads[j]) continue;
          int ni = g.token_node(sentence.tokens.begin + i);
          int nj = g.token_node(sentence.tokens.begin + j);
          if (ni < 0 || nj < 0) continue;
          g.dependency(ni, nj) = 1.0;
          g.dependency(nj, ni) = 1.0;
        }
      }
    }
  } catch (const std::exception& e) {
    g.dependency.setZero(n, n);
    if (warnings)
      warnings->push_back(doc.doc_id + ": dependency provider failed (" + e.what() +
                          "); dependency edges dropped");
  }

  return g;
}

Mat merge_adjacency(const std::array<Mat, kEdgeTypes>& adjacency,
                    const std::array<double, kEdgeTypes>& weights) {
  const Mat& first = adjacency[0];
  for (const Mat& m : adjacency)
    if (m.rows() != first.rows() || m.cols() != first.cols())
      throw nn::ShapeError("merge_adjacency: shape mismatch");
  Mat merged = Mat::Zero(first.rows(), first.cols());
  for (int y = 0; y < kEdgeTypes; ++y) merged += weights[y] * adjacency[y];
  return merged;
}

Mat adjacency_support(const SpatialGraph& graph) {
  int n = graph.node_count();
  Mat support = Mat::Zero(n, n);
  for (int y = 0; y < kEdgeTypes; ++y)
    support = support.cwiseMax(graph.matrix(y));
  return support;
}

Mat symmetric_normalizer(const Mat& support) {
  int n = static_cast<int>(support.rows());
  Eigen::VectorXd degree = support.rowwise().sum();
  degree.array() += 1.0;  // self-loop
  Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  return inv_sqrt * inv_sqrt.transpose();
}

}  // namespace hmcgr
