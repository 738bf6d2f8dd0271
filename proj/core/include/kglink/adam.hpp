#pragma once

#include <cstdint>
#include <vector>

#include "kglink/tensor.hpp"

namespace kglink {

// Adam with bias correction. Moments are kept per parameter slot, in the
// order the parameters were registered.
class AdamState {
 public:
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(double learning_rate) : lr(learning_rate) {}

  // Register one slot per parameter, shapes fixed up front.
  void register_param(size_t rows, size_t cols);
  size_t slots() const { return m_.size(); }
  uint64_t step_count() const { return step_; }

  // Apply one update to every parameter. params[k] and grads[k] must match
  // the registered shape of slot k. Advances the shared step counter.
  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

  Tensor& first_moment(size_t slot) { return m_[slot]; }
  Tensor& second_moment(size_t slot) { return v_[slot]; }
  const Tensor& first_moment(size_t slot) const { return m_[slot]; }
  const Tensor& second_moment(size_t slot) const { return v_[slot]; }
  void set_step_count(uint64_t s) { step_ = s; }

 private:
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  uint64_t step_ = 0;
};

// Scales the gradients so their joint L2 norm is at most max_norm; returns
// the pre-clip norm. No-op when max_norm <= 0.
double clip_gradients(std::vector<Tensor>& grads, double max_norm);

// Adds decay * param to each gradient (L2 regularization hook).
void apply_weight_decay(std::vector<Tensor>& grads,
                        const std::vector<Tensor*>& params, double decay);

}  // namespace kglink
