#include "hmcgr/nn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hmcgr::nn {

namespace {

[[noreturn]] void shape_fail(const std::string& op, const Node* a, const Node* b = nullptr) {
  std::ostringstream ss;
  ss << op << ": incompatible shapes " << a->rows() << "x" << a->cols();
  if (b) ss << " and " << b->rows() << "x" << b->cols();
  throw ShapeError(ss.str());
}

Tape* tape_of(Node* a, Node* b = nullptr) {
  if (b && a->tape != b->tape) throw ShapeError("operands belong to different tapes");
  return a->tape;
}

bool any_grad(std::span<Node* const> parents) {
  return std::any_of(parents.begin(), parents.end(),
                     [](Node* p) { return p->requires_grad; });
}

}  // namespace

// ---- ParamStore -------------------------------------------------------------

Param& ParamStore::create(const std::string& name, int rows, int cols) {
  if (params_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value.setZero(rows, cols);
  p->grad.setZero(rows, cols);
  Param* raw = p.get();
  params_.emplace(name, std::move(p));
  order_.push_back(raw);
  return *raw;
}

Param& ParamStore::fetch(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
  return *it->second;
}

const Param& ParamStore::fetch(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
  return *it->second;
}

bool ParamStore::has(const std::string& name) const { return params_.contains(name); }

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Param* p : order_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (Param* p : order_) p->zero_grad();
}

void ParamStore::save(std::ostream& out) const {
  const char magic[4] = {'H', 'M', 'W', '1'};
  out.write(magic, 4);
  std::uint64_t count = order_.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const Param* p : order_) {
    std::uint64_t len = p->name.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(p->name.data(), static_cast<std::streamsize>(len));
    std::int64_t rows = p->value.rows(), cols = p->value.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
}

void ParamStore::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "HMW1")
    throw std::runtime_error("weights: bad magic");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) throw std::runtime_error("weights: truncated stream");
    Param& p = fetch(name);
    if (p.value.rows() != rows || p.value.cols() != cols)
      throw std::runtime_error("weights: shape mismatch for '" + name + "'");
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!in) throw std::runtime_error("weights: truncated tensor '" + name + "'");
  }
}

// ---- Tape -------------------------------------------------------------------

Node* Tape::make(Mat val, std::vector<Node*> parents, bool requires_grad) {
  auto node = std::make_unique<Node>();
  node->val = std::move(val);
  node->parents = std::move(parents);
  node->requires_grad = requires_grad;
  node->tape = this;
  Node* raw = node.get();
  nodes_.push_back(std::move(node));
  return raw;
}

Node* Tape::param(Param& p) {
  Node* n = make(p.value, {}, true);
  Param* target = &p;
  n->back = [target](Node& self) { target->grad += self.grad; };
  return n;
}

void Tape::backward(Node* root) {
  if (root->rows() != 1 || root->cols() != 1)
    throw ShapeError("backward: root must be 1x1");
  if (!root->requires_grad) return;

  for (auto& n : nodes_) n->visited = false;

  // Mark the subgraph reachable from the root.
  std::vector<Node*> stack{root};
  root->visited = true;
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    for (Node* p : n->parents) {
      if (!p->visited && p->requires_grad) {
        p->visited = true;
        stack.push_back(p);
      }
    }
  }

  root->ensure_grad();
  root->grad(0, 0) += 1.0;

  // Creation order is topological, so one reverse sweep suffices.
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* n = it->get();
    if (!n->visited || !n->back) continue;
    n->ensure_grad();
    for (Node* p : n->parents)
      if (p->requires_grad) p->ensure_grad();
    n->back(*n);
  }
}

// ---- ops --------------------------------------------------------------------

Node* matmul(Node* a, Node* b) {
  if (a->cols() != b->rows()) shape_fail("matmul", a, b);
  Node* out = tape_of(a, b)->make(a->val * b->val, {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    out->back = [a, b](Node& self) {
      if (a->requires_grad) a->grad.noalias() += self.grad * b->val.transpose();
      if (b->requires_grad) b->grad.noalias() += a->val.transpose() * self.grad;
    };
  }
  return out;
}

Node* add(Node* a, Node* b) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) shape_fail("add", a, b);
  Node* out = tape_of(a, b)->make(a->val + b->val, {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    out->back = [a, b](Node& self) {
      if (a->requires_grad) a->grad += self.grad;
      if (b->requires_grad) b->grad += self.grad;
    };
  }
  return out;
}

Node* sub(Node* a, Node* b) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) shape_fail("sub", a, b);
  Node* out = tape_of(a, b)->make(a->val - b->val, {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    out->back = [a, b](Node& self) {
      if (a->requires_grad) a->grad += self.grad;
      if (b->requires_grad) b->grad -= self.grad;
    };
  }
  return out;
}

Node* cmul(Node* a, Node* b) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) shape_fail("cmul", a, b);
  Node* out =
      tape_of(a, b)->make(a->val.cwiseProduct(b->val), {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    out->back = [a, b](Node& self) {
      if (a->requires_grad) a->grad += self.grad.cwiseProduct(b->val);
      if (b->requires_grad) b->grad += self.grad.cwiseProduct(a->val);
    };
  }
  return out;
}

Node* cdiv(Node* a, Node* b) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) shape_fail("cdiv", a, b);
  Node* out =
      tape_of(a, b)->make(a->val.cwiseQuotient(b->val), {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    out->back = [a, b](Node& self) {
      if (a->requires_grad) a->grad += self.grad.cwiseQuotient(b->val);
      if (b->requires_grad)
        b->grad -= self.grad.cwiseProduct(a->val).cwiseQuotient(b->val.cwiseProduct(b->val));
    };
  }
  return out;
}

Node* add_rowwise(Node* a, Node* bias_row) {
  if (bias_row->rows() != 1 || bias_row->cols() != a->cols())
    shape_fail("add_rowwise", a, bias_row);
  Mat v = a->val;
  v.rowwise() += bias_row->val.row(0);
  Node* out = tape_of(a, bias_row)->make(std::move(v), {a, bias_row},
                                         any_grad(std::array{a, bias_row}));
  if (out->requires_grad) {
    out->back = [a, bias_row](Node& self) {
      if (a->requires_grad) a->grad += self.grad;
      if (bias_row->requires_grad) bias_row->grad += self.grad.colwise().sum();
    };
  }
  return out;
}

Node* scale(Node* a, double s) {
  Node* out = tape_of(a)->make(a->val * s, {a}, a->requires_grad);
  if (out->requires_grad)
    out->back = [a, s](Node& self) { a->grad += self.grad * s; };
  return out;
}

Node* add_scalar(Node* a, double s) {
  Node* out = tape_of(a)->make(a->val.array() + s, {a}, a->requires_grad);
  if (out->requires_grad)
    out->back = [a](Node& self) { a->grad += self.grad; };
  return out;
}

Node* scalar_mul(Node* scalar, Node* a) {
  if (scalar->rows() != 1 || scalar->cols() != 1) shape_fail("scalar_mul", scalar, a);
  double s = scalar->val(0, 0);
  Node* out =
      tape_of(scalar, a)->make(a->val * s, {scalar, a}, any_grad(std::array{scalar, a}));
  if (out->requires_grad) {
    out->back = [scalar, a, s](Node& self) {
      if (scalar->requires_grad)
        scalar->grad(0, 0) += self.grad.cwiseProduct(a->val).sum();
      if (a->requires_grad) a->grad += self.grad * s;
    };
  }
  return out;
}

Node* transpose(Node* a) {
  Node* out = tape_of(a)->make(a->val.transpose(), {a}, a->requires_grad);
  if (out->requires_grad)
    out->back = [a](Node& self) { a->grad += self.grad.transpose(); };
  return out;
}

Node* concat_cols(Node* a, Node* b) {
  if (a->rows() != b->rows()) shape_fail("concat_cols", a, b);
  Mat v(a->rows(), a->cols() + b->cols());
  v << a->val, b->val;
  Node* out = tape_of(a, b)->make(std::move(v), {a, b}, any_grad(std::array{a, b}));
  if (out->requires_grad) {
    int ac = a->cols(), bc = b->cols();
    out->back = [a, b, ac, bc](Node& self) {
      if (a->requires_grad) a->grad += self.grad.leftCols(ac);
      if (b->requires_grad) b->grad += self.grad.rightCols(bc);
    };
  }
  return out;
}

Node* concat_rows(const std::vector<Node*>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty part list");
  int cols = parts[0]->cols();
  int rows = 0;
  for (Node* p : parts) {
    if (p->cols() != cols) shape_fail("concat_rows", parts[0], p);
    rows += p->rows();
  }
  Mat v(rows, cols);
  int at = 0;
  for (Node* p : parts) {
    v.middleRows(at, p->rows()) = p->val;
    at += p->rows();
  }
  Node* out = parts[0]->tape->make(std::move(v), parts, any_grad(parts));
  if (out->requires_grad) {
    std::vector<Node*> ps = parts;
    out->back = [ps](Node& self) {
      int at = 0;
      for (Node* p : ps) {
        if (p->requires_grad) p->grad += self.grad.middleRows(at, p->rows());
        at += p->rows();
      }
    };
  }
  return out;
}

Node* slice_rows(Node* a, int first, int count) {
  if (first < 0 || count < 0 || first + count > a->rows()) shape_fail("slice_rows", a);
  Node* out = tape_of(a)->make(a->val.middleRows(first, count), {a}, a->requires_grad);
  if (out->requires_grad)
    out->back = [a, first, count](Node& self) {
      a->grad.middleRows(first, count) += self.grad;
    };
  return out;
}

Node* slice_cols(Node* a, int first, int count) {
  if (first < 0 || count < 0 || first + count > a->cols()) shape_fail("slice_cols", a);
  Node* out = tape_of(a)->make(a->val.middleCols(first, count), {a}, a->requires_grad);
  if (out->requires_grad)
    out->back = [a, first, count](Node& self) {
      a->grad.middleCols(first, count) += self.grad;
    };
  return out;
}

Node* gather_rows(Node* a, std::vector<int> rows) {
  Mat v(static_cast<int>(rows.size()), a->cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a->rows()) shape_fail("gather_rows", a);
    v.row(static_cast<int>(i)) = a->val.row(rows[i]);
  }
  Node* out = tape_of(a)->make(std::move(v), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a, rows = std::move(rows)](Node& self) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        a->grad.row(rows[i]) += self.grad.row(static_cast<int>(i));
    };
  }
  return out;
}

Node* softmax_rows(Node* a) {
  Mat v = a->val;
  for (int i = 0; i < v.rows(); ++i) {
    double m = v.row(i).maxCoeff();
    v.row(i) = (v.row(i).array() - m).exp();
    v.row(i) /= v.row(i).sum();
  }
  Node* out = tape_of(a)->make(std::move(v), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      for (int i = 0; i < self.val.rows(); ++i) {
        double dot = self.grad.row(i).dot(self.val.row(i));
        a->grad.row(i) +=
            (self.grad.row(i).array() - dot).matrix().cwiseProduct(self.val.row(i));
      }
    };
  }
  return out;
}

Node* log_softmax_rows(Node* a) {
  Mat v = a->val;
  for (int i = 0; i < v.rows(); ++i) {
    double m = v.row(i).maxCoeff();
    double lse = std::log((v.row(i).array() - m).exp().sum()) + m;
    v.row(i).array() -= lse;
  }
  Node* out = tape_of(a)->make(std::move(v), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      for (int i = 0; i < self.val.rows(); ++i) {
        double gsum = self.grad.row(i).sum();
        a->grad.row(i) +=
            self.grad.row(i) - (gsum * self.val.row(i).array().exp()).matrix();
      }
    };
  }
  return out;
}

Node* logsumexp_rows(Node* a) {
  Mat v(a->rows(), 1);
  for (int i = 0; i < a->rows(); ++i) {
    double m = a->val.row(i).maxCoeff();
    v(i, 0) = std::log((a->val.row(i).array() - m).exp().sum()) + m;
  }
  Node* out = tape_of(a)->make(std::move(v), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      for (int i = 0; i < self.val.rows(); ++i)
        a->grad.row(i) +=
            self.grad(i, 0) * (a->val.row(i).array() - self.val(i, 0)).exp().matrix();
    };
  }
  return out;
}

Node* relu(Node* a) {
  Node* out = tape_of(a)->make(a->val.cwiseMax(0.0), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      a->grad += self.grad.cwiseProduct(
          (a->val.array() > 0.0).cast<double>().matrix());
    };
  }
  return out;
}

Node* tanh_activation(Node* a) {
  Node* out = tape_of(a)->make(a->val.array().tanh(), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      a->grad += self.grad.cwiseProduct(
          (1.0 - self.val.array().square()).matrix());
    };
  }
  return out;
}

Node* layer_norm_rows(Node* a, Node* gain, Node* bias, double eps) {
  if (gain->rows() != 1 || gain->cols() != a->cols()) shape_fail("layer_norm", a, gain);
  if (bias->rows() != 1 || bias->cols() != a->cols()) shape_fail("layer_norm", a, bias);
  int n = a->rows(), d = a->cols();
  Mat xhat(n, d);
  Eigen::VectorXd inv_sd(n);
  for (int i = 0; i < n; ++i) {
    double mu = a->val.row(i).mean();
    double var = (a->val.row(i).array() - mu).square().mean();
    inv_sd(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (a->val.row(i).array() - mu) * inv_sd(i);
  }
  Mat v = (xhat.array().rowwise() * gain->val.row(0).array()).rowwise() +
          bias->val.row(0).array();
  Node* out = tape_of(a)->make(std::move(v), {a, gain, bias},
                               any_grad(std::array{a, gain, bias}));
  if (out->requires_grad) {
    out->back = [a, gain, bias, xhat = std::move(xhat), inv_sd = std::move(inv_sd),
                 d](Node& self) {
      if (gain->requires_grad)
        gain->grad += self.grad.cwiseProduct(xhat).colwise().sum();
      if (bias->requires_grad) bias->grad += self.grad.colwise().sum();
      if (a->requires_grad) {
        for (int i = 0; i < self.val.rows(); ++i) {
          Eigen::RowVectorXd dxhat =
              self.grad.row(i).cwiseProduct(gain->val.row(0));
          double m1 = dxhat.mean();
          double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
          a->grad.row(i) +=
              inv_sd(i) *
              (dxhat.array() - m1 - xhat.row(i).array() * m2).matrix();
        }
      }
      (void)d;
    };
  }
  return out;
}

Node* mean_rows(Node* a) {
  if (a->rows() == 0) throw ShapeError("mean_rows: empty input");
  Node* out = tape_of(a)->make(a->val.colwise().mean(), {a}, a->requires_grad);
  if (out->requires_grad) {
    double inv = 1.0 / a->rows();
    out->back = [a, inv](Node& self) {
      a->grad += inv * self.grad.replicate(a->rows(), 1);
    };
  }
  return out;
}

Node* sum_all(Node* a) {
  Mat v(1, 1);
  v(0, 0) = a->val.sum();
  Node* out = tape_of(a)->make(std::move(v), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      a->grad.array() += self.grad(0, 0);
    };
  }
  return out;
}

Node* mean_all(Node* a) {
  return scale(sum_all(a), 1.0 / (a->val.size() == 0 ? 1.0 : a->val.size()));
}

Node* sqrt_elem(Node* a) {
  Node* out = tape_of(a)->make(a->val.array().sqrt(), {a}, a->requires_grad);
  if (out->requires_grad) {
    out->back = [a](Node& self) {
      a->grad += self.grad.cwiseQuotient(2.0 * self.val.cwiseMax(1e-300));
    };
  }
  return out;
}

Node* cosine_similarity(Node* a, Node* b, double eps) {
  if (a->rows() != 1 || b->rows() != 1 || a->cols() != b->cols())
    shape_fail("cosine_similarity", a, b);
  if (a->val.norm() < eps || b->val.norm() < eps)
    throw std::domain_error("cosine_similarity: zero-norm vector");
  Node* dot = matmul(a, transpose(b));
  Node* na = sqrt_elem(matmul(a, transpose(a)));
  Node* nb = sqrt_elem(matmul(b, transpose(b)));
  return cdiv(dot, cmul(na, nb));
}

// ---- init -------------------------------------------------------------------

void init_xavier(Param& p, Rng& rng) {
  double bound = std::sqrt(6.0 / (p.value.rows() + p.value.cols()));
  for (int i = 0; i < p.value.rows(); ++i)
    for (int j = 0; j < p.value.cols(); ++j) p.value(i, j) = rng.uniform(-bound, bound);
}

void init_normal(Param& p, Rng& rng, double sd) {
  for (int i = 0; i < p.value.rows(); ++i)
    for (int j = 0; j < p.value.cols(); ++j) p.value(i, j) = rng.normal(0.0, sd);
}

void init_constant(Param& p, double v) { p.value.setConstant(v); }

}  // namespace hmcgr::nn
