#include "hmcgr/cls.hpp"

namespace hmcgr {

using nn::Mat;
using nn::Node;
using nn::Tape;

ClsModel ClsModel::build(nn::ParamStore& store, SubwordVocab mlm_vocab, SubwordVocab s2s_vocab,
                         const ClsConfig& cfg, nn::Rng& rng) {
  ClsModel m;
  m.cfg_ = cfg;
  m.mlm_vocab_ = std::move(mlm_vocab);
  m.s2s_vocab_ = std::move(s2s_vocab);

  nn::EncoderConfig base{.vocab = 0,
                         .hidden = cfg.hidden,
                         .heads = cfg.heads,
                         .layers = cfg.layers,
                         .ffn = cfg.ffn,
                         .max_positions = cfg.max_positions};
  nn::EncoderConfig cfg_b = base;
  cfg_b.vocab = m.mlm_vocab_.size();
  nn::EncoderConfig cfg_t = base;
  cfg_t.vocab = m.s2s_vocab_.size();
  m.encoder_b_ = nn::TransformerEncoder::build(store, "cls.encoder_b", cfg_b, rng);
  m.encoder_t_ = nn::TransformerEncoder::build(store, "cls.encoder_t", cfg_t, rng);

  m.cross_b_ = nn::make_attention(store, "cls.cross_b", cfg.hidden, cfg.heads, rng);
  m.cross_t_ = nn::make_attention(store, "cls.cross_t", cfg.hidden, cfg.heads, rng);
  m.cross_ln_b_ = nn::make_layer_norm(store, "cls.cross_ln_b", cfg.hidden);
  m.cross_ln_t_ = nn::make_layer_norm(store, "cls.cross_ln_t", cfg.hidden);

  m.word_pool_ = nn::make_span_pooler(store, "cls.word_pool", cfg.hidden, rng);
  m.role_pool_ = nn::make_span_pooler(store, "cls.role_pool", cfg.hidden, rng);

  for (int y = 0; y < kEdgeTypes; ++y) {
    m.edge_weights_[y] = &store.create(std::string("cls.edge_w.") + kEdgeNames[y], 1, 1);
    nn::init_constant(*m.edge_weights_[y], 1.0);
  }
  for (int l = 0; l < cfg.gcn_layers; ++l)
    m.gcn_layers_.push_back(
        nn::make_linear(store, "cls.gcn" + std::to_string(l), cfg.hidden, cfg.hidden, rng));

  int role_width = cfg.use_gcn ? 2 * cfg.hidden : cfg.hidden;
  m.classifier_ = nn::make_mlp(store, "cls.classifier", 3 * role_width, cfg.hidden,
                               kRelationClasses, rng);
  return m;
}

DualEncoding ClsModel::encode_dual(Tape& t, const Document& doc,
                                   const Sentence& sentence) const {
  std::vector<std::string> words;
  for (int i = sentence.tokens.begin; i < sentence.tokens.end; ++i)
    words.push_back(doc.tokens[i].text);
  if (words.empty()) throw nn::ShapeError("encode_dual: empty sentence");

  DualEncoding enc;
  enc.enc_b = mlm_vocab_.encode(words);
  enc.enc_t = s2s_vocab_.encode(words);
  enc.h_eb = encoder_b_.encode(t, enc.enc_b.ids);
  enc.h_et = encoder_t_.encode(t, enc.enc_t.ids);

  if (cfg_.use_cross_attention) {
    enc.h_cb = cross_ln_b_(
        t, add(enc.h_eb, cross_b_(t, enc.h_eb, enc.h_et, nullptr, &enc.cross_attn_b)));
    enc.h_ct = cross_ln_t_(t, add(enc.h_et, cross_t_(t, enc.h_et, enc.h_eb)));
  } else {
    enc.h_cb = enc.h_eb;
    enc.h_ct = enc.h_et;
  }

  // Word-level fusion: pieces of each word pool to one vector.
  std::vector<Node*> rows;
  rows.reserve(enc.enc_b.word_pieces.size());
  for (auto [begin, end] : enc.enc_b.word_pieces)
    rows.push_back(word_pool_.pool(t, enc.h_cb, begin, end));
  enc.cb_words = concat_rows(rows);
  return enc;
}

Node* ClsModel::encode_seq2seq(Tape& t, std::span<const std::string> words) const {
  if (words.empty()) throw nn::ShapeError("encode_seq2seq: empty sequence");
  auto enc = s2s_vocab_.encode(words);
  return encoder_t_.encode(t, enc.ids);
}

Node* ClsModel::node_features(Tape& t, const SpatialGraph& graph, const Document& doc,
                              const std::map<int, Node*>& words_by_sentence) const {
  std::vector<Node*> rows;
  rows.reserve(graph.node_count());
  for (int tok : graph.token_nodes) {
    int sid = doc.tokens[tok].sentence_id;
    auto it = words_by_sentence.find(sid);
    if (it == words_by_sentence.end())
      throw nn::ShapeError("node_features: missing encoding for sentence " +
                           std::to_string(sid));
    int local = tok - doc.sentence_span(sid).begin;
    rows.push_back(slice_rows(it->second, local, 1));
  }
  for (const auto& el : graph.element_nodes) {
    int sid = doc.tokens[el.span.begin].sentence_id;
    auto it = words_by_sentence.find(sid);
    if (it == words_by_sentence.end())
      throw nn::ShapeError("node_features: missing encoding for sentence " +
                           std::to_string(sid));
    TokenSpan s = doc.sentence_span(sid);
    rows.push_back(role_pool_.pool(t, it->second, el.span.begin - s.begin,
                                   el.span.end - s.begin));
  }
  return concat_rows(rows);
}

Node* ClsModel::merged_adjacency(Tape& t, const SpatialGraph& graph) const {
  int n = graph.node_count();
  Node* merged = t.constant(Mat::Zero(n, n));
  for (int y = 0; y < kEdgeTypes; ++y) {
    Node* weighted = scalar_mul(t.param(*edge_weights_[y]), t.constant(graph.matrix(y)));
    merged = add(merged, weighted);
  }
  return merged;
}

Node* ClsModel::gcn_fuse(Tape& t, const SpatialGraph& graph, Node* features) const {
  Node* merged = merged_adjacency(t, graph);
  int n = graph.node_count();
  Node* with_loops = add(merged, t.constant(Mat::Identity(n, n)));
  Mat normalizer = symmetric_normalizer(adjacency_support(graph));
  Node* a_hat = cmul(with_loops, t.constant(normalizer));

  Node* h = features;
  for (const auto& layer : gcn_layers_) h = relu(matmul(a_hat, layer(t, h)));
  return h;
}

Node* ClsModel::classify_triplet(Tape& t, const DualEncoding& enc, const CandidateTriplet& cand,
                                 const Sentence& sentence, const SpatialGraph* graph,
                                 Node* h_ns) const {
  auto role_vector = [&](const SpatialElement& el) -> Node* {
    int begin = el.span.begin - sentence.tokens.begin;
    int end = el.span.end - sentence.tokens.begin;
    Node* pooled = role_pool_.pool(t, enc.cb_words, begin, end);
    if (!cfg_.use_gcn) return pooled;
    if (!graph || !h_ns)
      throw nn::ShapeError("classify_triplet: GCN enabled but no graph features given");
    int node = graph->element_node(el.span);
    if (node < 0)
      throw ValidationError("classify_triplet: no graph node for element '" + el.id + "'");
    return concat_cols(pooled, slice_rows(h_ns, node, 1));
  };

  Node* joined = concat_cols(concat_cols(role_vector(cand.tm), role_vector(cand.tr)),
                             role_vector(cand.lg));
  return classifier_(t, joined);
}

std::array<double, kEdgeTypes> ClsModel::edge_weight_values() const {
  std::array<double, kEdgeTypes> w{};
  for (int y = 0; y < kEdgeTypes; ++y) w[y] = edge_weights_[y]->value(0, 0);
  return w;
}

Node* cls_loss(Tape& t, const std::vector<Node*>& logits, std::span<const LinkType> labels) {
  if (logits.empty()) throw nn::ShapeError("cls_loss: empty batch");
  if (logits.size() != labels.size())
    throw nn::ShapeError("cls_loss: logit/label count mismatch");
  Node* stacked = concat_rows(logits);
  std::vector<int> targets;
  targets.reserve(labels.size());
  for (LinkType label : labels) targets.push_back(static_cast<int>(label));
  return nn::cross_entropy_loss(t, stacked, targets);
}

}  // namespace hmcgr
