#include "hmcgr/nn/layers.hpp"

#include <cmath>

namespace hmcgr::nn {

Linear make_linear(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng) {
  Linear l;
  l.weight = &store.create(prefix + ".w", in, out);
  l.bias = &store.create(prefix + ".b", 1, out);
  init_xavier(*l.weight, rng);
  return l;
}

LayerNormLayer make_layer_norm(ParamStore& store, const std::string& prefix, int dim) {
  LayerNormLayer ln;
  ln.gain = &store.create(prefix + ".gain", 1, dim);
  ln.bias = &store.create(prefix + ".bias", 1, dim);
  init_constant(*ln.gain, 1.0);
  return ln;
}

MultiHeadAttention make_attention(ParamStore& store, const std::string& prefix, int dim,
                                  int heads, Rng& rng) {
  if (dim % heads != 0)
    throw std::invalid_argument(prefix + ": hidden size must be divisible by head count");
  MultiHeadAttention a;
  a.heads = heads;
  a.q = make_linear(store, prefix + ".q", dim, dim, rng);
  a.k = make_linear(store, prefix + ".k", dim, dim, rng);
  a.v = make_linear(store, prefix + ".v", dim, dim, rng);
  a.out = make_linear(store, prefix + ".out", dim, dim, rng);
  return a;
}

Node* MultiHeadAttention::operator()(Tape& t, Node* query_in, Node* kv_in, const Mat* mask,
                                     Mat* attn_probs) const {
  int dim = q.out_dim();
  int dh = dim / heads;
  Node* qs = q(t, query_in);
  Node* ks = k(t, kv_in);
  Node* vs = v(t, kv_in);

  if (attn_probs) attn_probs->setZero(query_in->rows(), kv_in->rows());

  std::vector<Node*> contexts;
  contexts.reserve(heads);
  double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    Node* qh = slice_cols(qs, h * dh, dh);
    Node* kh = slice_cols(ks, h * dh, dh);
    Node* vh = slice_cols(vs, h * dh, dh);
    Node* scores = scale(matmul(qh, transpose(kh)), inv_scale);
    if (mask) scores = add(scores, t.constant(*mask));
    Node* probs = softmax_rows(scores);
    if (attn_probs) *attn_probs += probs->val / heads;
    contexts.push_back(matmul(probs, vh));
  }

  Node* ctx = contexts[0];
  for (std::size_t h = 1; h < contexts.size(); ++h) ctx = concat_cols(ctx, contexts[h]);
  return out(t, ctx);
}

FeedForward make_feed_forward(ParamStore& store, const std::string& prefix, int dim, int inner,
                              Rng& rng) {
  FeedForward f;
  f.grow = make_linear(store, prefix + ".grow", dim, inner, rng);
  f.shrink = make_linear(store, prefix + ".shrink", inner, dim, rng);
  return f;
}

Node* EncoderBlock::operator()(Tape& t, Node* x) const {
  Node* attended = ln_attn(t, add(x, self_attn(t, x, x)));
  return ln_ff(t, add(attended, ff(t, attended)));
}

Node* DecoderBlock::operator()(Tape& t, Node* x, Node* memory) const {
  int n = x->rows();
  Mat causal = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) causal(i, j) = -1e9;
  Node* self = ln_self(t, add(x, self_attn(t, x, x, &causal)));
  Node* crossed = ln_cross(t, add(self, cross_attn(t, self, memory)));
  return ln_ff(t, add(crossed, ff(t, crossed)));
}

namespace {

Node* embed_sequence(Tape& t, Param& tok_embed, Param& pos_embed, std::span<const int> ids) {
  std::vector<int> rows(ids.begin(), ids.end());
  Node* tok = gather_rows(t.param(tok_embed), rows);
  Node* pos = slice_rows(t.param(pos_embed), 0, static_cast<int>(ids.size()));
  return add(tok, pos);
}

}  // namespace

TransformerEncoder TransformerEncoder::build(ParamStore& store, const std::string& prefix,
                                             const EncoderConfig& cfg, Rng& rng) {
  TransformerEncoder enc;
  enc.cfg_ = cfg;
  enc.tok_embed_ = &store.create(prefix + ".tok_embed", cfg.vocab, cfg.hidden);
  enc.pos_embed_ = &store.create(prefix + ".pos_embed", cfg.max_positions, cfg.hidden);
  init_normal(*enc.tok_embed_, rng, 0.02);
  init_normal(*enc.pos_embed_, rng, 0.02);
  for (int i = 0; i < cfg.layers; ++i) {
    std::string bp = prefix + ".block" + std::to_string(i);
    EncoderBlock b;
    b.self_attn = make_attention(store, bp + ".self", cfg.hidden, cfg.heads, rng);
    b.ln_attn = make_layer_norm(store, bp + ".ln_attn", cfg.hidden);
    b.ff = make_feed_forward(store, bp + ".ff", cfg.hidden, cfg.ffn, rng);
    b.ln_ff = make_layer_norm(store, bp + ".ln_ff", cfg.hidden);
    enc.blocks_.push_back(b);
  }
  return enc;
}

int TransformerEncoder::window_overlap() const {
  return std::min(64, cfg_.max_positions / 2);
}

Node* TransformerEncoder::encode_window(Tape& t, std::span<const int> ids) const {
  Node* h = embed_sequence(t, *tok_embed_, *pos_embed_, ids);
  for (const auto& block : blocks_) h = block(t, h);
  return h;
}

Node* TransformerEncoder::encode(Tape& t, std::span<const int> ids) const {
  if (ids.empty()) throw ShapeError("encode: empty sequence");
  int n = static_cast<int>(ids.size());
  int m = cfg_.max_positions;
  if (n <= m) return encode_window(t, ids);

  int overlap = window_overlap();
  int stride = std::max(1, m - overlap);
  std::vector<int> starts;
  for (int s = 0;; s += stride) {
    if (s + m >= n) {
      starts.push_back(n - m);
      break;
    }
    starts.push_back(s);
  }

  // Each position is taken from the window where it is most central; the
  // handover between consecutive windows lands mid-overlap.
  std::vector<Node*> parts;
  int covered = 0;
  for (std::size_t w = 0; w < starts.size(); ++w) {
    int ws = starts[w];
    int cut = (w + 1 < starts.size()) ? (ws + starts[w + 1] + m) / 2 : n;
    Node* enc = encode_window(t, ids.subspan(ws, m));
    parts.push_back(slice_rows(enc, covered - ws, cut - covered));
    covered = cut;
  }
  return concat_rows(parts);
}

TransformerDecoder TransformerDecoder::build(ParamStore& store, const std::string& prefix,
                                             const DecoderConfig& cfg, Rng& rng) {
  TransformerDecoder dec;
  dec.cfg_ = cfg;
  dec.tok_embed_ = &store.create(prefix + ".tok_embed", cfg.vocab, cfg.hidden);
  dec.pos_embed_ = &store.create(prefix + ".pos_embed", cfg.max_positions, cfg.hidden);
  init_normal(*dec.tok_embed_, rng, 0.02);
  init_normal(*dec.pos_embed_, rng, 0.02);
  for (int i = 0; i < cfg.layers; ++i) {
    std::string bp = prefix + ".block" + std::to_string(i);
    DecoderBlock b;
    b.self_attn = make_attention(store, bp + ".self", cfg.hidden, cfg.heads, rng);
    b.cross_attn = make_attention(store, bp + ".cross", cfg.hidden, cfg.heads, rng);
    b.ln_self = make_layer_norm(store, bp + ".ln_self", cfg.hidden);
    b.ln_cross = make_layer_norm(store, bp + ".ln_cross", cfg.hidden);
    b.ff = make_feed_forward(store, bp + ".ff", cfg.hidden, cfg.ffn, rng);
    b.ln_ff = make_layer_norm(store, bp + ".ln_ff", cfg.hidden);
    dec.blocks_.push_back(b);
  }
  dec.out_proj_ = make_linear(store, prefix + ".out_proj", cfg.hidden, cfg.vocab, rng);
  return dec;
}

Node* TransformerDecoder::forward(Tape& t, std::span<const int> input_ids, Node* memory) const {
  if (input_ids.empty()) throw ShapeError("decoder: empty input");
  if (static_cast<int>(input_ids.size()) > cfg_.max_positions)
    throw ShapeError("decoder: sequence exceeds max positions");
  Node* h = embed_sequence(t, *tok_embed_, *pos_embed_, input_ids);
  for (const auto& block : blocks_) h = block(t, h, memory);
  return out_proj_(t, h);
}

SpanPooler make_span_pooler(ParamStore& store, const std::string& prefix, int dim, Rng& rng) {
  SpanPooler p;
  p.score = make_linear(store, prefix + ".score", dim, 1, rng);
  return p;
}

Node* SpanPooler::pool(Tape& t, Node* h, int begin, int end) const {
  if (begin < 0 || end > h->rows() || begin >= end)
    throw ShapeError("span pool: empty or out-of-range span");
  Node* span = slice_rows(h, begin, end - begin);
  Node* weights = softmax_rows(transpose(score(t, span)));  // 1 x m
  return matmul(weights, span);
}

Mlp make_mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out,
             Rng& rng) {
  Mlp m;
  m.hidden_layer = make_linear(store, prefix + ".hidden", in, hidden, rng);
  m.out_layer = make_linear(store, prefix + ".out", hidden, out, rng);
  return m;
}

Node* cross_entropy_loss(Tape& t, Node* logits, std::span<const int> targets) {
  if (static_cast<int>(targets.size()) != logits->rows())
    throw ShapeError("cross_entropy: target count != logit rows");
  Node* lp = log_softmax_rows(logits);
  Mat pick = Mat::Zero(logits->rows(), logits->cols());
  double inv = -1.0 / static_cast<double>(targets.size());
  for (int i = 0; i < logits->rows(); ++i) {
    if (targets[i] < 0 || targets[i] >= logits->cols())
      throw ShapeError("cross_entropy: target id out of range");
    pick(i, targets[i]) = inv;
  }
  return sum_all(cmul(lp, t.constant(pick)));
}

}  // namespace hmcgr::nn
