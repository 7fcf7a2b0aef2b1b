#include "hmcgr/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace hmcgr {

using nlohmann::json;

CharSpan char_span(const Document& doc, const TokenSpan& span) {
  if (span.empty() || span.begin < 0 || span.end > static_cast<int>(doc.tokens.size()))
    throw ValidationError(doc.doc_id + ": unresolved token span");
  return {doc.tokens[span.begin].char_start, doc.tokens[span.end - 1].char_end};
}

LinkKey gold_link_key(const Document& doc, const SpatialLink& link) {
  LinkKey key;
  key.doc_id = doc.doc_id;
  key.type = link.type;
  auto to_span = [&](const std::optional<std::string>& slot) -> std::optional<CharSpan> {
    if (!slot) return std::nullopt;
    return char_span(doc, doc.element_or_throw(*slot).span);
  };
  key.tm = to_span(link.tm);
  key.tr = to_span(link.tr);
  key.lg = to_span(link.lg);
  return key;
}

std::vector<PredictedLink> union_links(std::span<const PredictedLink> cls_links,
                                       std::span<const PredictedLink> gen_links) {
  std::map<LinkKey, Branch> merged;
  for (const auto& p : cls_links) merged.emplace(p.key, p.source);
  for (const auto& p : gen_links) merged.emplace(p.key, p.source);
  std::vector<PredictedLink> out;
  out.reserve(merged.size());
  for (const auto& [key, source] : merged) out.push_back({key, source});
  return out;
}

namespace {

void finish_row(MetricRow& row) {
  double p = (row.tp + row.spurious) == 0
                 ? 0.0
                 : static_cast<double>(row.tp) / (row.tp + row.spurious);
  double r = (row.tp + row.missed) == 0 ? 0.0
                                        : static_cast<double>(row.tp) / (row.tp + row.missed);
  row.precision = 100.0 * p;
  row.recall = 100.0 * r;
  row.f1 = (p + r) == 0.0 ? 0.0 : 100.0 * (2.0 * p * r / (p + r));
}

MetricRow score(const std::set<LinkKey>& predictions, const std::set<LinkKey>& gold) {
  MetricRow row;
  for (const auto& p : predictions) {
    if (gold.contains(p)) ++row.tp;
    else ++row.spurious;
  }
  for (const auto& g : gold)
    if (!predictions.contains(g)) ++row.missed;
  finish_row(row);
  return row;
}

json row_to_json(const MetricRow& row) {
  return json{{"tp", row.tp},         {"spurious", row.spurious}, {"missed", row.missed},
              {"precision", row.precision}, {"recall", row.recall},     {"f1", row.f1}};
}

}  // namespace

EvalReport evaluate(std::span<const LinkKey> predictions, std::span<const Document> gold_docs) {
  std::set<LinkKey> pred(predictions.begin(), predictions.end());
  std::set<LinkKey> gold;
  for (const auto& doc : gold_docs)
    for (const auto& link : doc.gold_links) gold.insert(gold_link_key(doc, link));

  EvalReport report;
  report.overall = score(pred, gold);

  for (int t = 0; t < 3; ++t) {
    auto type = static_cast<LinkType>(t);
    std::set<LinkKey> p, g;
    for (const auto& k : pred)
      if (k.type == type) p.insert(k);
    for (const auto& k : gold)
      if (k.type == type) g.insert(k);
    report.per_type[t] = score(p, g);
  }

  std::set<LinkKey> pn, gn;
  for (const auto& k : pred)
    if (k.null_role()) pn.insert(k);
  for (const auto& k : gold)
    if (k.null_role()) gn.insert(k);
  report.null_role = score(pn, gn);

  return report;
}

json EvalReport::to_json() const {
  json j;
  j["overall"] = row_to_json(overall);
  j["qslink"] = row_to_json(per_type[0]);
  j["olink"] = row_to_json(per_type[1]);
  j["movelink"] = row_to_json(per_type[2]);
  j["null_role"] = row_to_json(null_role);
  return j;
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  auto line = [&](const std::string& name, const MetricRow& row) {
    out << std::left << std::setw(10) << name << std::right << std::setw(7) << row.precision
        << std::setw(7) << row.recall << std::setw(7) << row.f1 << std::setw(8) << row.tp
        << std::setw(10) << row.spurious << std::setw(8) << row.missed << "\n";
  };
  out << std::left << std::setw(10) << "link" << std::right << std::setw(7) << "P"
      << std::setw(7) << "R" << std::setw(7) << "F1" << std::setw(8) << "tp" << std::setw(10)
      << "spurious" << std::setw(8) << "missed" << "\n";
  line("QSLINK", per_type[0]);
  line("OLINK", per_type[1]);
  line("MOVELINK", per_type[2]);
  line("Overall", overall);
  line("null-role", null_role);
  return out.str();
}

const MetricRow& EvalReport::row_for_subset(const std::string& subset) const {
  if (subset == "all") return overall;
  if (subset == "null-role") return null_role;
  if (subset == "qslink") return per_type[0];
  if (subset == "olink") return per_type[1];
  if (subset == "movelink") return per_type[2];
  throw std::invalid_argument("unknown subset '" + subset + "'");
}

}  // namespace hmcgr
