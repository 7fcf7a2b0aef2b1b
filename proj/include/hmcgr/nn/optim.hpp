#pragma once

#include <map>
#include <string>

#include "hmcgr/nn/autograd.hpp"

namespace hmcgr::nn {

// Decoupled weight decay Adam. Gradients are consumed from Param::grad;
// callers zero them between steps.
class AdamW {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  explicit AdamW(Options opt) : opt_(opt) {}

  void step(ParamStore& params);
  const Options& options() const { return opt_; }
  void set_lr(double lr) { opt_.lr = lr; }

 private:
  struct Slot {
    Mat m, v;
  };
  Options opt_;
  long t_ = 0;
  std::map<std::string, Slot> state_;
};

class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(ParamStore& params);
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
};

}  // namespace hmcgr::nn
