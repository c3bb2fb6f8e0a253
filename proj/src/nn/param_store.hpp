#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "nn/random.hpp"
#include "nn/tensor.hpp"

namespace svc::nn {

struct Param {
  std::string name;
  Shape shape;
  std::vector<float> value;
  std::vector<float> grad;
  bool grad_ready = false;  // set when a backward pass deposited gradients
};

// Named trainable tensors. Registration order is the (deterministic)
// iteration order; names are unique.
class ParamStore {
 public:
  Param& add(const std::string& name, Shape shape);
  Param& add_kaiming(const std::string& name, Shape shape, int fan_in, Pcg32& rng);
  Param& add_normal(const std::string& name, Shape shape, float stddev, Pcg32& rng);

  bool contains(const std::string& name) const;
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;

  size_t count() const { return params_.size(); }
  size_t total_values() const;
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  void zero_grads();

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, size_t> index_;
};

// Connects tape leaves to parameters for one forward/backward pass.
class ParamBinder {
 public:
  explicit ParamBinder(Tape<float>& tape) : tape_(&tape) {}

  int bind(Param& p) {
    int id = tape_->leaf(p.shape, p.value.data());
    bound_.push_back({id, &p});
    return id;
  }

  // Bind as a frozen constant (no gradient flows into the parameter).
  int bind_frozen(const Param& p) { return tape_->constant(p.shape, p.value.data()); }

  // After tape.backward(): accumulate leaf grads into the parameters.
  void accumulate_grads() {
    for (auto& [id, p] : bound_) {
      const float* g = tape_->grad(id);
      kernels::axpy(p->grad.data(), 1.0f, g, p->grad.size());
      p->grad_ready = true;
    }
  }

 private:
  Tape<float>* tape_;
  std::vector<std::pair<int, Param*>> bound_;
};

}  // namespace svc::nn
