#include "hmcgr/nn/optim.hpp"

#include <cmath>

namespace hmcgr::nn {

void AdamW::step(ParamStore& params) {
  ++t_;
  double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (Param* p : params.all()) {
    Slot& s = state_[p->name];
    if (s.m.size() == 0) {
      s.m.setZero(p->value.rows(), p->value.cols());
      s.v.setZero(p->value.rows(), p->value.cols());
    }
    s.m = opt_.beta1 * s.m + (1.0 - opt_.beta1) * p->grad;
    s.v = opt_.beta2 * s.v.array() + (1.0 - opt_.beta2) * p->grad.array().square();
    Mat m_hat = s.m / bc1;
    Mat v_hat = s.v / bc2;
    p->value.array() -=
        opt_.lr * (m_hat.array() / (v_hat.array().sqrt() + opt_.eps) +
                   opt_.weight_decay * p->value.array());
  }
}

void Sgd::step(ParamStore& params) {
  for (Param* p : params.all()) p->value -= lr_ * p->grad;
}

}  // namespace hmcgr::nn
