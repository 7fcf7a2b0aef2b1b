#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmcgr::nn {

using Mat = Eigen::MatrixXd;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  template <class T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// A persistent, trainable tensor. Gradients accumulate across backward
// passes until the optimizer consumes them.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Registry of named parameters with stable addresses and deterministic
// iteration order (insertion order).
class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols);
  Param& fetch(const std::string& name);
  const Param& fetch(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<Param*>& all() { return order_; }
  const std::vector<Param*>& all() const { return order_; }
  std::size_t size() const { return order_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  void save(std::ostream& out) const;
  void load(std::istream& in);  // shapes must match the existing store

 private:
  std::map<std::string, std::unique_ptr<Param>> params_;
  std::vector<Param*> order_;
};

class Tape;

// One value in the computation graph. Owned by a Tape; the creation order
// of nodes is a valid topological order.
struct Node {
  Mat val;
  Mat grad;
  bool requires_grad = false;
  bool visited = false;
  std::vector<Node*> parents;
  std::function<void(Node&)> back;
  Tape* tape = nullptr;

  int rows() const { return static_cast<int>(val.rows()); }
  int cols() const { return static_cast<int>(val.cols()); }
  void ensure_grad() {
    if (grad.rows() != val.rows() || grad.cols() != val.cols())
      grad.setZero(val.rows(), val.cols());
  }
};

// Define-by-run gradient tape. Create one per forward pass; all intermediate
// nodes live until the tape is destroyed.
class Tape {
 public:
  Node* make(Mat val, std::vector<Node*> parents, bool requires_grad);
  Node* constant(Mat val) { return make(std::move(val), {}, false); }
  Node* leaf(Mat val) { return make(std::move(val), {}, true); }
  // Leaf mirroring a persistent parameter; backward accumulates into p.grad.
  Node* param(Param& p);

  // Root must be 1x1. Accumulates into node grads and any touched Param.
  void backward(Node* root);

  std::size_t size() const { return nodes_.size(); }

 private:
  std::deque<std::unique_ptr<Node>> nodes_;
};

// ---- ops ------------------------------------------------------------------

Node* matmul(Node* a, Node* b);
Node* add(Node* a, Node* b);
Node* sub(Node* a, Node* b);
Node* cmul(Node* a, Node* b);
Node* cdiv(Node* a, Node* b);
Node* add_rowwise(Node* a, Node* bias_row);       // bias: 1 x cols(a)
Node* scale(Node* a, double s);
Node* add_scalar(Node* a, double s);
Node* scalar_mul(Node* scalar, Node* a);          // scalar: 1x1
Node* transpose(Node* a);
Node* concat_cols(Node* a, Node* b);
Node* concat_rows(const std::vector<Node*>& parts);
Node* slice_rows(Node* a, int first, int count);
Node* slice_cols(Node* a, int first, int count);
Node* gather_rows(Node* a, std::vector<int> rows);
Node* softmax_rows(Node* a);
Node* log_softmax_rows(Node* a);
Node* logsumexp_rows(Node* a);                    // n x d -> n x 1
Node* relu(Node* a);
Node* tanh_activation(Node* a);
Node* layer_norm_rows(Node* a, Node* gain, Node* bias, double eps = 1e-5);
Node* mean_rows(Node* a);                         // n x d -> 1 x d
Node* sum_all(Node* a);                           // -> 1x1
Node* mean_all(Node* a);                          // -> 1x1
Node* sqrt_elem(Node* a);

// 1xd row vectors -> 1x1 cosine similarity. Throws on zero-norm input.
Node* cosine_similarity(Node* a, Node* b, double eps = 1e-12);

// Scalar helpers for loss bookkeeping (all operands 1x1).
inline double scalar_value(const Node* n) { return n->val(0, 0); }

// ---- parameter initialization ---------------------------------------------

void init_xavier(Param& p, Rng& rng);
void init_normal(Param& p, Rng& rng, double sd);
void init_constant(Param& p, double v);

}  // namespace hmcgr::nn
