#include "nn/param_store.hpp"

#include <cmath>

#include "common/error.hpp"

namespace svc::nn {

Param& ParamStore::add(const std::string& name, Shape shape) {
  if (index_.count(name))
    raise(ErrorKind::InvalidConfig, "duplicate parameter name: " + name);
  Param p;
  p.name = name;
  p.shape = shape;
  p.value.assign(shape.numel(), 0.0f);
  p.grad.assign(shape.numel(), 0.0f);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParamStore::add_kaiming(const std::string& name, Shape shape, int fan_in, Pcg32& rng) {
  Param& p = add(name, shape);
  const float bound = std::sqrt(1.0f / float(fan_in));
  for (auto& v : p.value) v = float(rng.uniform(-bound, bound));
  return p;
}

Param& ParamStore::add_normal(const std::string& name, Shape shape, float stddev, Pcg32& rng) {
  Param& p = add(name, shape);
  for (auto& v : p.value) v = float(rng.normal() * stddev);
  return p;
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) > 0; }

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorKind::CheckpointError, "unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorKind::CheckpointError, "unknown parameter: " + name);
  return params_[it->second];
}

size_t ParamStore::total_values() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) {
    std::fill(p.grad.begin(), p.grad.end(), 0.0f);
    p.grad_ready = false;
  }
}

}  // namespace svc::nn
