#include "hmcgr/crf.hpp"

#include <limits>
#include <stdexcept>

namespace hmcgr {

using nn::Mat;
using nn::Node;
using nn::Tape;

LinearChainCrf LinearChainCrf::build(nn::ParamStore& store, const std::string& prefix,
                                     int num_tags, nn::Rng& rng) {
  LinearChainCrf crf;
  crf.num_tags_ = num_tags;
  crf.transitions_ = &store.create(prefix + ".trans", num_tags, num_tags);
  crf.start_ = &store.create(prefix + ".start", 1, num_tags);
  crf.end_ = &store.create(prefix + ".end", 1, num_tags);
  nn::init_normal(*crf.transitions_, rng, 0.01);
  nn::init_normal(*crf.start_, rng, 0.01);
  nn::init_normal(*crf.end_, rng, 0.01);
  return crf;
}

Node* LinearChainCrf::neg_log_likelihood(Tape& t, Node* emissions,
                                         std::span<const int> gold) const {
  int n = emissions->rows();
  int T = num_tags_;
  if (emissions->cols() != T)
    throw nn::ShapeError("crf: emission width does not match tag count");
  if (static_cast<int>(gold.size()) != n)
    throw nn::ShapeError("crf: gold length does not match sequence length");

  Node* trans = t.param(*transitions_);
  Node* start = t.param(*start_);
  Node* end = t.param(*end_);

  // Forward recursion over log-potentials. alpha is 1 x T.
  Node* alpha = add(start, slice_rows(emissions, 0, 1));
  Mat ones_row = Mat::Ones(1, T);
  for (int i = 1; i < n; ++i) {
    // scores[from][to] = alpha[from] + trans[from][to]
    Node* alpha_col = transpose(alpha);
    Node* spread = matmul(alpha_col, t.constant(ones_row));
    Node* scores = add(spread, trans);
    Node* reduced = transpose(logsumexp_rows(transpose(scores)));  // 1 x T
    alpha = add(reduced, slice_rows(emissions, i, 1));
  }
  Node* log_z = logsumexp_rows(add(alpha, end));  // 1 x 1

  // Gold path score via constant selector masks.
  Mat emit_pick = Mat::Zero(n, T);
  for (int i = 0; i < n; ++i) {
    if (gold[i] < 0 || gold[i] >= T) throw nn::ShapeError("crf: gold tag out of range");
    emit_pick(i, gold[i]) = 1.0;
  }
  Mat trans_pick = Mat::Zero(T, T);
  for (int i = 1; i < n; ++i) trans_pick(gold[i - 1], gold[i]) += 1.0;
  Mat start_pick = Mat::Zero(1, T);
  start_pick(0, gold[0]) = 1.0;
  Mat end_pick = Mat::Zero(1, T);
  end_pick(0, gold[n - 1]) = 1.0;

  Node* gold_score = sum_all(cmul(emissions, t.constant(emit_pick)));
  gold_score = add(gold_score, sum_all(cmul(trans, t.constant(trans_pick))));
  gold_score = add(gold_score, sum_all(cmul(start, t.constant(start_pick))));
  gold_score = add(gold_score, sum_all(cmul(end, t.constant(end_pick))));

  return sub(log_z, gold_score);
}

std::vector<int> LinearChainCrf::viterbi(
    const Mat& emissions,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* allowed,
    const Eigen::Matrix<bool, Eigen::Dynamic, 1>* start_allowed) const {
  int n = static_cast<int>(emissions.rows());
  int T = num_tags_;
  if (n == 0) return {};
  constexpr double kForbidden = -1e9;

  Mat trans = transitions_->value;
  if (allowed) {
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j)
        if (!(*allowed)(i, j)) trans(i, j) = kForbidden;
  }

  Eigen::VectorXd score = (start_->value.row(0).transpose() + emissions.row(0).transpose());
  if (start_allowed) {
    for (int j = 0; j < T; ++j)
      if (!(*start_allowed)(j)) score(j) = kForbidden;
  }

  Eigen::MatrixXi backptr(n, T);
  for (int i = 1; i < n; ++i) {
    Eigen::VectorXd next(T);
    for (int j = 0; j < T; ++j) {
      int best_from = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < T; ++k) {
        double cand = score(k) + trans(k, j);
        if (cand > best) {
          best = cand;
          best_from = k;
        }
      }
      next(j) = best + emissions(i, j);
      backptr(i, j) = best_from;
    }
    score = next;
  }
  score += end_->value.row(0).transpose();

  int best_tag = 0;
  score.maxCoeff(&best_tag);
  std::vector<int> tags(n);
  tags[n - 1] = best_tag;
  for (int i = n - 1; i > 0; --i) tags[i - 1] = backptr(i, tags[i]);
  return tags;
}

namespace bio {

int tag_count(int label_count) { return 1 + 2 * label_count; }
int b_tag(int label) { return 1 + 2 * label; }
int i_tag(int label) { return 2 + 2 * label; }
bool is_b(int tag) { return tag >= 1 && tag % 2 == 1; }
bool is_i(int tag) { return tag >= 2 && tag % 2 == 0; }
int label_of(int tag) { return tag == 0 ? -1 : (tag - 1) / 2; }

std::vector<int> encode_spans(int length, std::span<const Span> spans) {
  std::vector<int> tags(length, 0);
  for (const auto& s : spans) {
    if (s.begin < 0 || s.end > length || s.begin >= s.end)
      throw std::invalid_argument("bio: span out of range");
    for (int i = s.begin; i < s.end; ++i) {
      if (tags[i] != 0) throw std::invalid_argument("bio: overlapping spans");
      tags[i] = i == s.begin ? b_tag(s.label) : i_tag(s.label);
    }
  }
  return tags;
}

std::vector<Span> decode_tags(std::span<const int> tags) {
  std::vector<Span> spans;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    if (!is_b(tags[i])) continue;
    int label = label_of(tags[i]);
    int end = i + 1;
    while (end < static_cast<int>(tags.size()) && is_i(tags[end]) &&
           label_of(tags[end]) == label)
      ++end;
    spans.push_back({i, end, label});
    i = end - 1;
  }
  return spans;
}

bool valid(std::span<const int> tags) {
  int prev = 0;
  for (int tag : tags) {
    if (is_i(tag)) {
      bool continues = (is_b(prev) || is_i(prev)) && label_of(prev) == label_of(tag);
      if (!continues) return false;
    }
    prev = tag;
  }
  return true;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed_transitions(int label_count) {
  int T = tag_count(label_count);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed(T, T);
  allowed.setConstant(true);
  for (int to = 0; to < T; ++to) {
    if (!is_i(to)) continue;
    for (int from = 0; from < T; ++from) {
      bool ok = (is_b(from) || is_i(from)) && label_of(from) == label_of(to);
      allowed(from, to) = ok;
    }
  }
  return allowed;
}

Eigen::Matrix<bool, Eigen::Dynamic, 1> allowed_start(int label_count) {
  int T = tag_count(label_count);
  Eigen::Matrix<bool, Eigen::Dynamic, 1> ok(T);
  for (int tag = 0; tag < T; ++tag) ok(tag) = !is_i(tag);
  return ok;
}

}  // namespace bio

}  // namespace hmcgr
