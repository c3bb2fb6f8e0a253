#include "nn/adam.hpp"

#include <cmath>

#include "common/error.hpp"
#include "kernels/kernels.hpp"

namespace svc::nn {

Adam::Adam(ParamStore& store, AdamConfig cfg) : store_(&store), cfg_(cfg) {
  m_.reserve(store.count());
  v_.reserve(store.count());
  for (const auto& p : store.params()) {
    m_.emplace_back(p.value.size(), 0.0f);
    v_.emplace_back(p.value.size(), 0.0f);
  }
}

float Adam::current_lr() const {
  if (cfg_.decay_step > 0 && step_count_ >= cfg_.decay_step) return cfg_.lr_decayed;
  return cfg_.lr_initial;
}

void Adam::step() {
  const float lr = current_lr();
  step_count_ += 1;
  const float c1 = 1.0f - std::pow(cfg_.beta1, float(step_count_));
  const float c2 = 1.0f - std::pow(cfg_.beta2, float(step_count_));
  auto& params = store_->params();
  for (size_t i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    if (!p.grad_ready)
      raise(ErrorKind::OptimizerError, "missing gradient for parameter: " + p.name);
    if (!kernels::all_finite(p.grad.data(), p.grad.size()))
      raise(ErrorKind::NumericalError, "non-finite gradient for parameter: " + p.name);
    kernels::adam_update(p.value.data(), m_[i].data(), v_[i].data(), p.grad.data(),
                         p.value.size(), lr, cfg_.beta1, cfg_.beta2, cfg_.eps, c1, c2);
  }
  store_->zero_grads();
}

}  // namespace svc::nn
