#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmcgr/nn/autograd.hpp"

namespace hmcgr::nn {

struct Linear {
  Param* weight = nullptr;  // in x out
  Param* bias = nullptr;    // 1 x out

  Node* operator()(Tape& t, Node* x) const {
    return add_rowwise(matmul(x, t.param(*weight)), t.param(*bias));
  }
  int in_dim() const { return static_cast<int>(weight->value.rows()); }
  int out_dim() const { return static_cast<int>(weight->value.cols()); }
};

Linear make_linear(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng);

struct LayerNormLayer {
  Param* gain = nullptr;  // 1 x d
  Param* bias = nullptr;  // 1 x d

  Node* operator()(Tape& t, Node* x) const {
    return layer_norm_rows(x, t.param(*gain), t.param(*bias));
  }
};

LayerNormLayer make_layer_norm(ParamStore& store, const std::string& prefix, int dim);

// Scaled dot-product attention with `heads` heads over a shared model width.
// `mask` (q_len x kv_len) is added to the attention scores before softmax.
// When `attn_probs` is given, the head-averaged attention matrix is stored
// there (used by diagnostics and tests).
struct MultiHeadAttention {
  int heads = 1;
  Linear q, k, v, out;

  Node* operator()(Tape& t, Node* query_in, Node* kv_in, const Mat* mask = nullptr,
                   Mat* attn_probs = nullptr) const;
};

MultiHeadAttention make_attention(ParamStore& store, const std::string& prefix, int dim,
                                  int heads, Rng& rng);

struct FeedForward {
  Linear grow, shrink;

  Node* operator()(Tape& t, Node* x) const { return shrink(t, relu(grow(t, x))); }
};

FeedForward make_feed_forward(ParamStore& store, const std::string& prefix, int dim, int inner,
                              Rng& rng);

// Post-norm transformer encoder block: LN(x + attn(x)), then LN(y + ffn(y)).
struct EncoderBlock {
  MultiHeadAttention self_attn;
  LayerNormLayer ln_attn, ln_ff;
  FeedForward ff;

  Node* operator()(Tape& t, Node* x) const;
};

struct DecoderBlock {
  MultiHeadAttention self_attn, cross_attn;
  LayerNormLayer ln_self, ln_cross, ln_ff;
  FeedForward ff;

  Node* operator()(Tape& t, Node* x, Node* memory) const;
};

struct EncoderConfig {
  int vocab = 0;
  int hidden = 64;
  int heads = 4;
  int layers = 2;
  int ffn = 128;
  int max_positions = 512;
};

// Bidirectional transformer encoder with learned positions. Sequences longer
// than max_positions are encoded as overlapping windows and each position
// takes its vector from the window where it sits most centrally.
class TransformerEncoder {
 public:
  static TransformerEncoder build(ParamStore& store, const std::string& prefix,
                                  const EncoderConfig& cfg, Rng& rng);

  Node* encode(Tape& t, std::span<const int> ids) const;
  int hidden() const { return cfg_.hidden; }
  const EncoderConfig& config() const { return cfg_; }

  // Overlap used by the sliding window; clamped for small max_positions.
  int window_overlap() const;

 private:
  Node* encode_window(Tape& t, std::span<const int> ids) const;

  EncoderConfig cfg_;
  Param* tok_embed_ = nullptr;  // vocab x d
  Param* pos_embed_ = nullptr;  // max_positions x d
  std::vector<EncoderBlock> blocks_;
};

struct DecoderConfig {
  int vocab = 0;
  int hidden = 64;
  int heads = 4;
  int layers = 2;
  int ffn = 128;
  int max_positions = 256;
};

// Causal transformer decoder with cross-attention into an encoder memory.
// forward() maps the shifted target ids to per-position vocabulary logits.
class TransformerDecoder {
 public:
  static TransformerDecoder build(ParamStore& store, const std::string& prefix,
                                  const DecoderConfig& cfg, Rng& rng);

  Node* forward(Tape& t, std::span<const int> input_ids, Node* memory) const;
  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  Param* tok_embed_ = nullptr;
  Param* pos_embed_ = nullptr;
  std::vector<DecoderBlock> blocks_;
  Linear out_proj_;
};

// Attention-weighted span pooling with a learned scorer; weights are
// normalized over the span. A single-row span returns that row unchanged.
struct SpanPooler {
  Linear score;  // d -> 1

  Node* pool(Tape& t, Node* h, int begin, int end) const;
};

SpanPooler make_span_pooler(ParamStore& store, const std::string& prefix, int dim, Rng& rng);

struct Mlp {
  Linear hidden_layer, out_layer;

  Node* operator()(Tape& t, Node* x) const {
    return out_layer(t, relu(hidden_layer(t, x)));
  }
};

Mlp make_mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out,
             Rng& rng);

// Mean negative log-likelihood of `targets` under row-wise softmax of logits.
Node* cross_entropy_loss(Tape& t, Node* logits, std::span<const int> targets);

}  // namespace hmcgr::nn
