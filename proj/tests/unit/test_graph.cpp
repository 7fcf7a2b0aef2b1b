#include <doctest.h>

#include "hmcgr/graph.hpp"
#include "test_support.hpp"

using namespace hmcgr;
using nn::Mat;

namespace {

Document synthetic_doc(const std::string& text,
                       const std::vector<std::tuple<std::string, int, int, ElementKind>>& els) {
  Document doc;
  doc.doc_id = "syn";
  doc.tokens = tokenize(text);
  doc.sentences = collect_sentences(doc.tokens);
  for (const auto& [id, begin, end, kind] : els) {
    SpatialElement el;
    el.id = id;
    el.kind = kind;
    el.span = {begin, end};
    el.text = doc.surface(el.span);
    doc.elements.push_back(el);
  }
  validate_document(doc);
  return doc;
}

std::vector<int> all_sentences(const Document& doc) {
  std::vector<int> ids;
  for (const auto& s : doc.sentences) ids.push_back(s.id);
  return ids;
}

}  // namespace

TEST_CASE("two-token one-element sentence: boundary and element edges") {
  Document doc = synthetic_doc("red barn", {{"e1", 0, 2, ElementKind::Place}});
  NullProvider provider;
  SpatialGraph g = build_graph(doc, all_sentences(doc), doc.elements, provider);

  REQUIRE(g.node_count() == 3);
  // Boundary: every off-diagonal pair of the 3 same-sentence nodes.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(g.boundary(i, j) == (i == j ? 0.0 : 1.0));
  // Element: exactly one 1 per covered token, directed element -> token.
  CHECK(g.element.sum() == 2.0);
  int enode = g.element_node(TokenSpan{0, 2});
  REQUIRE(enode == 2);
  CHECK(g.element(enode, 0) == 1.0);
  CHECK(g.element(enode, 1) == 1.0);
  CHECK(g.element(0, enode) == 0.0);
}

TEST_CASE("figure-one graph: coref edge between who and children") {
  Document doc = parse_corpus_xml(test_support::read_file("figure1.xml"), "f1");
  RuleBasedProvider provider;
  SpatialGraph g = build_graph(doc, all_sentences(doc), doc.elements, provider);

  int who = g.element_node(doc.element_or_throw("se2").span);
  int children = g.element_node(doc.element_or_throw("se1").span);
  REQUIRE(who >= 0);
  REQUIRE(children >= 0);
  CHECK(g.coref(who, children) == 1.0);
  CHECK(g.coref(children, who) == 1.0);
}

TEST_CASE("random toy sentences match the quadratic rule oracle") {
  nn::Rng rng(1024);
  RuleBasedProvider provider;
  const std::vector<std::string> vocab{"the", "box",  "dog", "it",    "they", "ran",
                                       "to",  "barn", "in",  "field", "sat",  ","};

  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.uniform_int(2, 12);
    std::string text;
    for (int i = 0; i < n; ++i) {
      if (!text.empty()) text += ' ';
      text += vocab[static_cast<std::size_t>(rng.uniform_int(0, vocab.size() - 1))];
    }
    Document doc;
    doc.doc_id = "toy";
    doc.tokens = tokenize(text);
    doc.sentences = collect_sentences(doc.tokens);
    n = static_cast<int>(doc.tokens.size());

    int n_els = rng.uniform_int(0, 4);
    std::vector<bool> used(n, false);
    for (int e = 0; e < n_els; ++e) {
      int begin = rng.uniform_int(0, n - 1);
      int len = rng.uniform_int(1, 2);
      int end = std::min(n, begin + len);
      bool free = true;
      for (int i = begin; i < end; ++i) free = free && !used[i];
      if (!free) continue;
      if (doc.tokens[begin].sentence_id != doc.tokens[end - 1].sentence_id) continue;
      for (int i = begin; i < end; ++i) used[i] = true;
      SpatialElement el;
      el.id = "e" + std::to_string(e);
      el.kind = static_cast<ElementKind>(rng.uniform_int(0, 7));
      el.span = {begin, end};
      el.text = doc.surface(el.span);
      doc.elements.push_back(el);
    }

    auto sids = all_sentences(doc);
    SpatialGraph g = build_graph(doc, sids, doc.elements, provider);
    int nodes = g.node_count();
    int n_tok = static_cast<int>(g.token_nodes.size());

    // Independent rule evaluation over all node pairs.
    auto sentence_of = [&](int node) {
      if (node < n_tok) return doc.tokens[g.token_nodes[node]].sentence_id;
      return doc.tokens[g.element_nodes[node - n_tok].span.begin].sentence_id;
    };
    auto mention_nodes = [&](const TokenSpan& span) {
      std::vector<int> out;
      for (std::size_t i = 0; i < g.element_nodes.size(); ++i)
        if (g.element_nodes[i].span == span) {
          out.push_back(n_tok + static_cast<int>(i));
          return out;
        }
      for (int tok = span.begin; tok < span.end; ++tok)
        for (int i = 0; i < n_tok; ++i)
          if (g.token_nodes[i] == tok) out.push_back(i);
      return out;
    };
    auto chains = provider.coreference_chains(doc);
    std::map<int, std::vector<int>> heads_by_sentence;
    for (const auto& s : doc.sentences)
      heads_by_sentence[s.id] = provider.dependency_heads(doc, s);

    for (int i = 0; i < nodes; ++i) {
      for (int j = 0; j < nodes; ++j) {
        double want_boundary = (i != j && sentence_of(i) == sentence_of(j)) ? 1.0 : 0.0;
        CHECK(g.boundary(i, j) == want_boundary);

        double want_element = 0.0;
        if (i >= n_tok && j < n_tok) {
          const auto& span = g.element_nodes[i - n_tok].span;
          if (span.contains(g.token_nodes[j])) want_element = 1.0;
        }
        CHECK(g.element(i, j) == want_element);

        double want_coref = 0.0;
        for (const auto& chain : chains)
          for (std::size_t a = 0; a < chain.size(); ++a)
            for (std::size_t b = 0; b < chain.size(); ++b) {
              if (a == b) continue;
              auto na = mention_nodes(chain[a]);
              auto nb = mention_nodes(chain[b]);
              for (int x : na)
                for (int y : nb)
                  if (x == i && y == j && x != y) want_coref = 1.0;
            }
        CHECK(g.coref(i, j) == want_coref);

        double want_dep = 0.0;
        if (i != j && i < n_tok && j < n_tok) {
          int ti = g.token_nodes[i], tj = g.token_nodes[j];
          int si = doc.tokens[ti].sentence_id, sj = doc.tokens[tj].sentence_id;
          if (si == sj) {
            TokenSpan span = doc.sentence_span(si);
            const auto& heads = heads_by_sentence[si];
            if (heads[ti - span.begin] == heads[tj - span.begin]) want_dep = 1.0;
          }
        }
        CHECK(g.dependency(i, j) == want_dep);
      }
    }

    // Symmetry of boundary, coref, dependency.
    CHECK((g.boundary - g.boundary.transpose()).norm() == 0.0);
    CHECK((g.coref - g.coref.transpose()).norm() == 0.0);
    CHECK((g.dependency - g.dependency.transpose()).norm() == 0.0);
  }
}

TEST_CASE("merge: unit weights on disjoint edge sets is the plain sum") {
  std::array<Mat, kEdgeTypes> mats;
  Mat a = Mat::Zero(3, 3), b = Mat::Zero(3, 3), c = Mat::Zero(3, 3), d = Mat::Zero(3, 3);
  a(0, 1) = 1;
  b(1, 2) = 1;
  c(2, 0) = 1;
  mats = {a, b, c, d};
  Mat merged = merge_adjacency(mats, {1, 1, 1, 1});
  CHECK((merged - (a + b + c + d)).norm() == 0.0);
}

TEST_CASE("merge: all-zero inputs stay zero") {
  std::array<Mat, kEdgeTypes> mats{Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2),
                                   Mat::Zero(2, 2)};
  CHECK(merge_adjacency(mats, {0.3, 2.0, -1.0, 5.0}).norm() == 0.0);
}

TEST_CASE("merge matches the hand-computed 4-node fixture") {
  Mat ab(4, 4), ae(4, 4), ac(4, 4), ad(4, 4);
  ab << 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0;
  ae << 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0;
  ac << 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0;
  ad << 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0;
  Mat merged = merge_adjacency({ab, ae, ac, ad}, {0.5, 0.25, 0.25, 1.0});
  Mat expect(4, 4);
  expect << 0.0, 1.0, 1.5, 0.0,
            0.75, 0.0, 0.0, 0.0,
            1.5, 0.0, 0.0, 0.75,
            0.0, 0.0, 0.5, 0.0;
  CHECK((merged - expect).norm() == doctest::Approx(0.0));
}

TEST_CASE("merge zero-preservation holds on random inputs") {
  nn::Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    int n = rng.uniform_int(2, 6);
    std::array<Mat, kEdgeTypes> mats;
    for (auto& m : mats) {
      m = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (rng.uniform(0, 1) < 0.3) m(i, j) = 1.0;
    }
    std::array<double, kEdgeTypes> w{rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1),
                                     rng.normal(0, 1)};
    Mat merged = merge_adjacency(mats, w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        bool in_support = mats[0](i, j) != 0 || mats[1](i, j) != 0 || mats[2](i, j) != 0 ||
                          mats[3](i, j) != 0;
        if (!in_support) CHECK(merged(i, j) == 0.0);
      }
  }
}

TEST_CASE("merge rejects shape mismatches") {
  std::array<Mat, kEdgeTypes> mats{Mat::Zero(2, 2), Mat::Zero(3, 3), Mat::Zero(2, 2),
                                   Mat::Zero(2, 2)};
  CHECK_THROWS_AS(merge_adjacency(mats, {1, 1, 1, 1}), nn::ShapeError);
}

TEST_CASE("window includes the coreference antecedent sentence") {
  std::string xml = R"(<SpaceEvalTask id="d">
<TEXT><![CDATA[The box is here. It is red.]]></TEXT>
<TAGS>
<SPATIAL_ENTITY id="se1" start="4" end="7" text="box"/>
</TAGS>
</SpaceEvalTask>)";
  Document doc = parse_corpus_xml(xml, "d");
  REQUIRE(doc.sentences.size() == 2);
  RuleBasedProvider provider;
  auto window = window_sentences(doc, 1, provider);
  CHECK(window == std::vector<int>{0, 1});
  NullProvider none;
  CHECK(window_sentences(doc, 1, none) == std::vector<int>{1});
}
