#pragma once

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmcgr/corpus.hpp"

namespace hmcgr {

// Character-offset span; canonical link identity uses these rather than
// surface strings so duplicate words cannot collide.
struct CharSpan {
  int begin = 0;
  int end = 0;
  auto operator<=>(const CharSpan&) const = default;
};

struct LinkKey {
  std::string doc_id;
  LinkType type = LinkType::Null;
  std::optional<CharSpan> tm, tr, lg;

  auto operator<=>(const LinkKey&) const = default;
  bool null_role() const { return !tm || !tr || !lg; }
};

CharSpan char_span(const Document& doc, const TokenSpan& span);
LinkKey gold_link_key(const Document& doc, const SpatialLink& link);

enum class Branch { Cls, Gen };

struct PredictedLink {
  LinkKey key;
  Branch source = Branch::Cls;
};

// Set union after canonicalization: duplicates collapse, order is the sorted
// key order (deterministic).
std::vector<PredictedLink> union_links(std::span<const PredictedLink> cls_links,
                                       std::span<const PredictedLink> gen_links);

struct MetricRow {
  int tp = 0;
  int spurious = 0;  // predicted but not gold
  int missed = 0;    // gold but not predicted
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged scores over pooled counts; the null-role row restricts both
// predictions and gold to null-role links. P and R report 0 when their
// denominator is empty.
struct EvalReport {
  MetricRow overall;
  std::array<MetricRow, 3> per_type;  // QSLINK, OLINK, MOVELINK
  MetricRow null_role;

  nlohmann::json to_json() const;
  std::string to_table() const;  // aligned text, one row per link type + overall

  const MetricRow& row_for_subset(const std::string& subset) const;
};

EvalReport evaluate(std::span<const LinkKey> predictions, std::span<const Document> gold_docs);

}  // namespace hmcgr
