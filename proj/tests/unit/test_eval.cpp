#include <doctest.h>

#include <algorithm>
#include <set>

#include "hmcgr/eval.hpp"
#include "test_support.hpp"

using namespace hmcgr;

namespace {

LinkKey key(const std::string& doc, LinkType type, std::optional<CharSpan> tm,
            std::optional<CharSpan> tr, std::optional<CharSpan> lg) {
  LinkKey k;
  k.doc_id = doc;
  k.type = type;
  k.tm = tm;
  k.tr = tr;
  k.lg = lg;
  return k;
}

}  // namespace

TEST_CASE("gold predictions score 100 everywhere") {
  auto docs = test_support::load_smoke_corpus();
  std::vector<LinkKey> predictions;
  for (const auto& doc : docs)
    for (const auto& link : doc.gold_links) predictions.push_back(gold_link_key(doc, link));
  EvalReport r = evaluate(predictions, docs);
  CHECK(r.overall.precision == doctest::Approx(100.0));
  CHECK(r.overall.recall == doctest::Approx(100.0));
  CHECK(r.overall.f1 == doctest::Approx(100.0));
  CHECK(r.null_role.f1 == doctest::Approx(100.0));
  CHECK(r.overall.spurious == 0);
  CHECK(r.overall.missed == 0);
}

TEST_CASE("empty predictions against non-empty gold use the stated convention") {
  auto docs = test_support::load_smoke_corpus();
  EvalReport r = evaluate({}, docs);
  CHECK(r.overall.precision == 0.0);
  CHECK(r.overall.recall == 0.0);
  CHECK(r.overall.f1 == 0.0);
  CHECK(r.overall.missed == 10);
}

TEST_CASE("hand fixture: 3 gold, 2 predicted, 1 correct gives 50.0/33.3/40.0") {
  Document doc;
  doc.doc_id = "hand";
  doc.tokens = tokenize("a b c d e f");
  doc.sentences = collect_sentences(doc.tokens);
  auto add_el = [&](const std::string& id, int b, int e) {
    SpatialElement el;
    el.id = id;
    el.kind = ElementKind::SpatialEntity;
    el.span = {b, e};
    el.text = doc.surface(el.span);
    doc.elements.push_back(el);
  };
  for (int i = 0; i < 6; ++i) add_el("e" + std::to_string(i), i, i + 1);
  auto mk = [&](const std::string& id, LinkType t, const char* a, const char* b,
                const char* c) {
    SpatialLink l;
    l.id = id;
    l.type = t;
    if (a) l.tm = a;
    if (b) l.tr = b;
    if (c) l.lg = c;
    return l;
  };
  doc.gold_links.push_back(mk("g1", LinkType::QsLink, "e0", "e1", "e2"));
  doc.gold_links.push_back(mk("g2", LinkType::OLink, "e3", "e4", "e5"));
  doc.gold_links.push_back(mk("g3", LinkType::MoveLink, "e0", nullptr, "e5"));

  std::vector<LinkKey> predictions{
      gold_link_key(doc, doc.gold_links[0]),                       // correct
      key("hand", LinkType::QsLink, CharSpan{8, 9}, std::nullopt,  // spurious
          CharSpan{10, 11}),
  };
  std::vector<Document> docs{doc};
  EvalReport r = evaluate(predictions, docs);
  CHECK(r.overall.tp == 1);
  CHECK(r.overall.spurious == 1);
  CHECK(r.overall.missed == 2);
  CHECK(r.overall.precision == doctest::Approx(50.0));
  CHECK(r.overall.recall == doctest::Approx(100.0 / 3.0));
  CHECK(r.overall.f1 == doctest::Approx(40.0));
  // Rounded rendering matches the published convention (one decimal).
  std::string table = r.to_table();
  CHECK(table.find("50.0") != std::string::npos);
  CHECK(table.find("33.3") != std::string::npos);
  CHECK(table.find("40.0") != std::string::npos);

  // Micro over a single document equals the document's own scores.
  EvalReport alone = evaluate(predictions, std::span<const Document>(docs.data(), 1));
  CHECK(alone.overall.f1 == doctest::Approx(r.overall.f1));
}

TEST_CASE("null-role subset excludes all non-null-role gold links") {
  auto docs = test_support::load_smoke_corpus();
  // Predict exactly the null-role gold links.
  std::vector<LinkKey> predictions;
  int gold_null = 0;
  for (const auto& doc : docs)
    for (const auto& link : doc.gold_links)
      if (link.null_role()) {
        predictions.push_back(gold_link_key(doc, link));
        ++gold_null;
      }
  EvalReport r = evaluate(predictions, docs);
  CHECK(gold_null == 4);
  CHECK(r.null_role.tp == 4);
  CHECK(r.null_role.missed == 0);
  CHECK(r.null_role.precision == doctest::Approx(100.0));
  CHECK(r.null_role.recall == doctest::Approx(100.0));
  // Overall recall is partial: the full-role links are missed.
  CHECK(r.overall.missed > 0);
}

TEST_CASE("evaluation is order independent and deduplicates predictions") {
  auto docs = test_support::load_smoke_corpus();
  std::vector<LinkKey> predictions;
  for (const auto& doc : docs)
    for (const auto& link : doc.gold_links) predictions.push_back(gold_link_key(doc, link));
  std::vector<LinkKey> shuffled = predictions;
  std::reverse(shuffled.begin(), shuffled.end());
  shuffled.push_back(shuffled.front());  // duplicate
  EvalReport a = evaluate(predictions, docs);
  EvalReport b = evaluate(shuffled, docs);
  CHECK(a.overall.f1 == doctest::Approx(b.overall.f1));
  CHECK(a.overall.tp == b.overall.tp);
}

TEST_CASE("per-type rows restrict both sides by link type") {
  auto docs = test_support::load_smoke_corpus();
  std::vector<LinkKey> predictions;
  for (const auto& doc : docs)
    for (const auto& link : doc.gold_links)
      if (link.type == LinkType::QsLink) predictions.push_back(gold_link_key(doc, link));
  EvalReport r = evaluate(predictions, docs);
  CHECK(r.per_type[0].f1 == doctest::Approx(100.0));  // QSLINK
  CHECK(r.per_type[2].recall == doctest::Approx(0.0));  // MOVELINK untouched
  CHECK(r.row_for_subset("qslink").f1 == doctest::Approx(100.0));
  CHECK_THROWS(r.row_for_subset("bogus"));
}

TEST_CASE("union decoding: set union with duplicates collapsed") {
  LinkKey a = key("d", LinkType::QsLink, CharSpan{0, 1}, CharSpan{2, 3}, CharSpan{4, 5});
  LinkKey b = key("d", LinkType::MoveLink, CharSpan{6, 7}, std::nullopt, CharSpan{8, 9});
  std::vector<PredictedLink> cls{{a, Branch::Cls}};
  std::vector<PredictedLink> gen{{a, Branch::Gen}, {b, Branch::Gen}};
  auto merged = union_links(cls, gen);
  CHECK(merged.size() == 2);

  // Union of empties is empty.
  CHECK(union_links({}, {}).empty());

  // Superset of each branch; no duplicates.
  for (const auto& p : cls)
    CHECK(std::any_of(merged.begin(), merged.end(),
                      [&](const PredictedLink& m) { return m.key == p.key; }));
  for (const auto& p : gen)
    CHECK(std::any_of(merged.begin(), merged.end(),
                      [&](const PredictedLink& m) { return m.key == p.key; }));
  std::set<LinkKey> seen;
  for (const auto& m : merged) CHECK(seen.insert(m.key).second);
}

TEST_CASE("link keys use character offsets, not surfaces") {
  auto docs = test_support::load_smoke_corpus();
  const Document& doc5 = docs[4];  // two MOVELINKs sharing mover "She"
  LinkKey k1 = gold_link_key(doc5, doc5.gold_links[0]);
  LinkKey k2 = gold_link_key(doc5, doc5.gold_links[1]);
  CHECK(k1 != k2);
  CHECK(k1.tm == k2.tm);  // same mover span
  CHECK(k1.lg != k2.lg);
}

TEST_CASE("report json carries all rows") {
  auto docs = test_support::load_smoke_corpus();
  EvalReport r = evaluate({}, docs);
  auto j = r.to_json();
  CHECK(j.contains("overall"));
  CHECK(j.contains("null_role"));
  CHECK(j.contains("movelink"));
  CHECK(j["overall"]["missed"].get<int>() == 10);
}
