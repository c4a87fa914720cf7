#include "fagcn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fagcn {

Adam::Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr < 0.0) throw std::invalid_argument("adam: lr must be non-negative");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    Param& par = *params_[p];
    for (std::size_t i = 0; i < par.value.size(); ++i) {
      const double g = par.grad.data[i] + cfg_.weight_decay * par.value.data[i];
      m_[p].data[i] = cfg_.beta1 * m_[p].data[i] + (1.0 - cfg_.beta1) * g;
      v_[p].data[i] = cfg_.beta2 * v_[p].data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[p].data[i] / bc1;
      const double vhat = v_[p].data[i] / bc2;
      par.value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    par.zero_grad();
  }
}

}  // namespace fagcn
