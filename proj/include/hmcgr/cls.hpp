#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/corpus.hpp"
#include "hmcgr/cte.hpp"
#include "hmcgr/graph.hpp"
#include "hmcgr/nn/layers.hpp"
#include "hmcgr/tokenizer.hpp"

namespace hmcgr {

inline constexpr int kRelationClasses = 4;  // QSLINK, OLINK, MOVELINK, NULL

struct ClsConfig {
  int hidden = 64;
  int heads = 4;
  int layers = 2;
  int ffn = 128;
  int max_positions = 512;
  int gcn_layers = 2;
  bool use_gcn = true;
  bool use_cross_attention = true;
};

// Encoder states for one sentence. Piece-level streams from the two
// encoders, their cross-attended counterparts, and the word-level fusion of
// the masked-LM stream used by span pooling and the graph.
struct DualEncoding {
  nn::Node* h_eb = nullptr;  // pieces x d, masked-LM stream
  nn::Node* h_et = nullptr;  // pieces x d, seq2seq stream
  nn::Node* h_cb = nullptr;  // cross-attended masked-LM stream
  nn::Node* h_ct = nullptr;  // cross-attended seq2seq stream (kept for RFX)
  nn::Node* cb_words = nullptr;  // words x d
  SubwordVocab::Encoding enc_b, enc_t;
  nn::Mat cross_attn_b;  // head-averaged attention of the b->t direction
};

// Classification branch: dual encoders fused by cross attention, span-pooled
// role vectors, graph convolution over the spatial graph, and an MLP over
// the concatenated role features.
class ClsModel {
 public:
  static ClsModel build(nn::ParamStore& store, SubwordVocab mlm_vocab, SubwordVocab s2s_vocab,
                        const ClsConfig& cfg, nn::Rng& rng);

  const ClsConfig& config() const { return cfg_; }
  const SubwordVocab& mlm_vocab() const { return mlm_vocab_; }
  const SubwordVocab& s2s_vocab() const { return s2s_vocab_; }

  DualEncoding encode_dual(nn::Tape& t, const Document& doc, const Sentence& sentence) const;

  // Plain seq2seq-encoder pass over a raw word sequence (no cross
  // attention); used for inverted sentences.
  nn::Node* encode_seq2seq(nn::Tape& t, std::span<const std::string> words) const;

  // Pools sentence-local word span [begin, end) from a words x d matrix.
  nn::Node* pool_span(nn::Tape& t, nn::Node* words, int begin, int end) const {
    return role_pool_.pool(t, words, begin, end);
  }

  // Node features: window token nodes take their word vectors, element
  // nodes take span-pooled vectors. `words_by_sentence` maps sentence id to
  // that sentence's cb_words matrix.
  nn::Node* node_features(nn::Tape& t, const SpatialGraph& graph, const Document& doc,
                          const std::map<int, nn::Node*>& words_by_sentence) const;

  // Learned elementwise merge of the four adjacencies (scalar weight per
  // edge type) with symmetric normalization and self-loops.
  nn::Node* merged_adjacency(nn::Tape& t, const SpatialGraph& graph) const;
  nn::Node* gcn_fuse(nn::Tape& t, const SpatialGraph& graph, nn::Node* features) const;

  // Logits for one candidate (1 x 4). `h_ns` may be null when the GCN is
  // disabled; otherwise the candidate's element nodes must exist in the
  // graph (missing node ids throw).
  nn::Node* classify_triplet(nn::Tape& t, const DualEncoding& enc, const CandidateTriplet& cand,
                             const Sentence& sentence, const SpatialGraph* graph,
                             nn::Node* h_ns) const;

  std::array<double, kEdgeTypes> edge_weight_values() const;

 private:
  ClsConfig cfg_;
  SubwordVocab mlm_vocab_, s2s_vocab_;
  nn::TransformerEncoder encoder_b_, encoder_t_;
  nn::MultiHeadAttention cross_b_, cross_t_;  // b queries t / t queries b
  nn::LayerNormLayer cross_ln_b_, cross_ln_t_;
  nn::SpanPooler word_pool_, role_pool_;
  std::array<nn::Param*, kEdgeTypes> edge_weights_{};
  std::vector<nn::Linear> gcn_layers_;
  nn::Mlp classifier_;
};

// Mean cross-entropy of a stack of candidate logits against their labels.
nn::Node* cls_loss(nn::Tape& t, const std::vector<nn::Node*>& logits,
                   std::span<const LinkType> labels);

}  // namespace hmcgr
