#pragma once

#include <span>
#include <string>
#include <vector>

#include "hmcgr/nn/autograd.hpp"

namespace hmcgr {

// Linear-chain CRF head over a fixed tag inventory. The negative
// log-likelihood runs on the gradient tape; Viterbi decoding is a plain
// Eigen computation with optional transition/start constraints.
class LinearChainCrf {
 public:
  static LinearChainCrf build(nn::ParamStore& store, const std::string& prefix, int num_tags,
                              nn::Rng& rng);

  int num_tags() const { return num_tags_; }

  // emissions: n x T on the tape; gold: n tag ids.
  nn::Node* neg_log_likelihood(nn::Tape& t, nn::Node* emissions,
                               std::span<const int> gold) const;

  // allowed(i, j) == false forbids transition i -> j; start_allowed(j) == false
  // forbids tag j at the first position.
  std::vector<int> viterbi(const nn::Mat& emissions,
                           const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* allowed =
                               nullptr,
                           const Eigen::Matrix<bool, Eigen::Dynamic, 1>* start_allowed =
                               nullptr) const;

 private:
  int num_tags_ = 0;
  nn::Param* transitions_ = nullptr;  // T x T, [from][to]
  nn::Param* start_ = nullptr;        // 1 x T
  nn::Param* end_ = nullptr;          // 1 x T
};

// BIO tag space over `label_count` labels: tag 0 is O, label l maps to
// B = 1 + 2l and I = 2 + 2l.
namespace bio {

int tag_count(int label_count);
int b_tag(int label);
int i_tag(int label);
bool is_b(int tag);
bool is_i(int tag);
int label_of(int tag);  // -1 for O

struct Span {
  int begin = 0;  // local token index, half open
  int end = 0;
  int label = 0;
};

// Marks [begin, end) with B-label/I-label; overlapping spans are rejected.
std::vector<int> encode_spans(int length, std::span<const Span> spans);
std::vector<Span> decode_tags(std::span<const int> tags);
bool valid(std::span<const int> tags);

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed_transitions(int label_count);
Eigen::Matrix<bool, Eigen::Dynamic, 1> allowed_start(int label_count);

}  // namespace bio

}  // namespace hmcgr
