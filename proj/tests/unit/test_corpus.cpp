#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "hmcgr/corpus.hpp"
#include "hmcgr/xml.hpp"
#include "test_support.hpp"

using namespace hmcgr;

TEST_CASE("xml reader handles attributes, cdata and entities") {
  auto root = xml::parse(R"(<?xml version="1.0"?>
<ROOT id="d&amp;1"><TEXT><![CDATA[a <raw> b]]> c</TEXT><TAGS><X id="x1"/></TAGS></ROOT>)");
  CHECK(root.tag == "ROOT");
  CHECK(*root.attribute("id") == "d&1");
  CHECK(root.child("TEXT")->text == "a <raw> b c");
  CHECK(root.child("TAGS")->children.size() == 1);
}

TEST_CASE("xml reader reports byte offsets on malformed input") {
  std::string bad = "<ROOT><TEXT>x</WRONG></ROOT>";
  try {
    xml::parse(bad);
    FAIL("expected parse error");
  } catch (const xml::ParseError& e) {
    CHECK(e.offset == bad.find("</WRONG>"));
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(xml::parse("<A><B></A>"), xml::ParseError);
  CHECK_THROWS_AS(xml::parse("<A attr=oops/>"), xml::ParseError);
  CHECK_THROWS_AS(xml::parse("not xml"), xml::ParseError);
}

TEST_CASE("tokenizer splits words and punctuation with offsets") {
  auto tokens = tokenize("The children, who are at recess, are playing in the school.");
  REQUIRE(tokens.size() == 14);
  CHECK(tokens[1].text == "children");
  CHECK(tokens[1].char_start == 4);
  CHECK(tokens[1].char_end == 12);
  CHECK(tokens[2].text == ",");
  CHECK(tokens.back().text == ".");
  for (const auto& t : tokens) CHECK(t.sentence_id == 0);
}

TEST_CASE("tokenizer segments sentences at terminal punctuation") {
  auto tokens = tokenize("A dog sat. The cat ran! Done?");
  CHECK(tokens.front().sentence_id == 0);
  CHECK(tokens.back().sentence_id == 2);
  auto sentences = collect_sentences(tokens);
  REQUIRE(sentences.size() == 3);
  CHECK(sentences[0].tokens.end == 4);
  // lowercase continuation does not split
  auto abbrev = tokenize("approx. twenty meters");
  CHECK(abbrev.back().sentence_id == 0);
}

TEST_CASE("figure-one fixture parses to 6 elements and 4 links, 3 null-role") {
  std::vector<std::string> warnings;
  Document doc = parse_corpus_xml(test_support::read_file("figure1.xml"), "fallback", &warnings);
  CHECK(doc.doc_id == "figure1");
  CHECK(doc.elements.size() == 6);
  CHECK(doc.gold_links.size() == 4);
  CHECK(warnings.empty());

  int null_role = 0;
  for (const auto& link : doc.gold_links)
    if (link.null_role()) ++null_role;
  CHECK(null_role == 3);

  const SpatialElement& children = doc.element_or_throw("se1");
  CHECK(children.text == "children");
  CHECK(children.kind == ElementKind::SpatialEntity);
  CHECK(children.span == TokenSpan{1, 2});
  CHECK(doc.sentences.size() == 1);
}

TEST_CASE("empty document body parses to zero tokens and links") {
  Document doc = parse_corpus_xml("<SpaceEvalTask><TEXT></TEXT><TAGS></TAGS></SpaceEvalTask>",
                                  "empty");
  CHECK(doc.doc_id == "empty");
  CHECK(doc.tokens.empty());
  CHECK(doc.gold_links.empty());
  CHECK(doc.sentences.empty());
}

TEST_CASE("dangling link reference raises a validation error naming the link") {
  std::string xml = R"(<SpaceEvalTask id="d">
<TEXT><![CDATA[A dog.]]></TEXT>
<TAGS>
<SPATIAL_ENTITY id="se1" start="2" end="5" text="dog"/>
<QSLINK id="bad1" trajector="se1" trigger="ghost" landmark=""/>
</TAGS>
</SpaceEvalTask>)";
  try {
    parse_corpus_xml(xml, "d");
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad1") != std::string::npos);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("misaligned offsets snap to covering tokens and are logged") {
  std::string xml = R"(<SpaceEvalTask id="d">
<TEXT><![CDATA[The red barn.]]></TEXT>
<TAGS>
<PLACE id="pl1" start="5" end="12" text="ed barn"/>
</TAGS>
</SpaceEvalTask>)";
  std::vector<std::string> warnings;
  Document doc = parse_corpus_xml(xml, "d", &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("snapped") != std::string::npos);
  CHECK(doc.element_or_throw("pl1").span == TokenSpan{1, 3});
  CHECK(doc.element_or_throw("pl1").text == "red barn");
}

TEST_CASE("jsonl round trip preserves the document exactly") {
  Document doc = parse_corpus_xml(test_support::read_file("figure1.xml"), "d");
  Document again = from_jsonl(to_jsonl(doc));
  CHECK(doc == again);

  auto docs = test_support::load_smoke_corpus();
  std::string blob = corpus_to_jsonl(docs);
  auto docs2 = corpus_from_jsonl(blob);
  REQUIRE(docs2.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(docs[i] == docs2[i]);
}

TEST_CASE("gold link slots always resolve within the document") {
  for (const auto& doc : test_support::load_smoke_corpus()) {
    for (const auto& link : doc.gold_links) {
      for (const auto& slot : {link.tm, link.tr, link.lg})
        if (slot) CHECK(doc.element(*slot) != nullptr);
    }
  }
}

namespace {

std::vector<Document> make_numbered_docs(int n) {
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    Document d;
    d.doc_id = "doc" + std::to_string(i);
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

TEST_CASE("split 10 docs at 0.8 with seed 1024 gives 8/2") {
  auto split = split_dataset(make_numbered_docs(10), 0.8, 1024);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);
}

TEST_CASE("split 2 docs at 0.5 gives 1/1") {
  auto split = split_dataset(make_numbered_docs(2), 0.5, 7);
  CHECK(split.train.size() == 1);
  CHECK(split.test.size() == 1);
}

TEST_CASE("split is deterministic and partitions the input") {
  auto a = split_dataset(make_numbered_docs(9), 0.7, 42);
  auto b = split_dataset(make_numbered_docs(9), 0.7, 42);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  std::set<std::string> seen;
  for (const auto& d : a.train) seen.insert(d.doc_id);
  for (const auto& d : a.test) CHECK(seen.insert(d.doc_id).second);
  CHECK(seen.size() == 9);
}

TEST_CASE("split rejects fewer than 2 documents and bad ratios") {
  CHECK_THROWS_AS(split_dataset(make_numbered_docs(1), 0.8, 1), CorpusError);
  CHECK_THROWS_AS(split_dataset(make_numbered_docs(4), 0.0, 1), CorpusError);
  CHECK_THROWS_AS(split_dataset(make_numbered_docs(4), 1.0, 1), CorpusError);
}

TEST_CASE("count_links on the figure-one fixture") {
  std::vector<Document> docs{parse_corpus_xml(test_support::read_file("figure1.xml"), "d")};
  LinkHistogram h = count_links(docs);
  CHECK(h.count(LinkType::MoveLink) == 2);
  CHECK(h.count(LinkType::QsLink) == 1);
  CHECK(h.count(LinkType::OLink) == 1);
  CHECK(h.null_role_total == 3);
  CHECK(h.total == 4);
  CHECK(h.null_role_fraction() == doctest::Approx(0.75));
}

TEST_CASE("count_links on an empty set is all zero") {
  LinkHistogram h = count_links(std::span<const Document>{});
  CHECK(h.total == 0);
  CHECK(h.null_role_total == 0);
  for (int c : h.by_type) CHECK(c == 0);
}
