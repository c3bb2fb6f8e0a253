#pragma once

#include <cstdint>
#include <vector>

#include "nn/param_store.hpp"

namespace svc::nn {

struct AdamConfig {
  float lr_initial = 1e-4f;
  float lr_decayed = 5e-5f;
  int64_t decay_step = 0;  // step at which the decayed rate takes over; 0 = never
  float beta1 = 0.8f;
  float beta2 = 0.99f;
  float eps = 1e-9f;
};

// Bias-corrected Adam over one ParamStore. Moments are owned here, aligned to
// the store's registration order; gradients are cleared after each step.
class Adam {
 public:
  Adam(ParamStore& store, AdamConfig cfg);

  void step();
  int64_t step_count() const { return step_count_; }
  float current_lr() const;

  // checkpoint plumbing
  std::vector<std::vector<float>>& moments_m() { return m_; }
  std::vector<std::vector<float>>& moments_v() { return v_; }
  void set_step_count(int64_t s) { step_count_ = s; }

 private:
  ParamStore* store_;
  AdamConfig cfg_;
  int64_t step_count_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace svc::nn
