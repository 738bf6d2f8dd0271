#include "kglink/adam.hpp"

#include <cmath>

#include "kglink/errors.hpp"

namespace kglink {

void AdamState::register_param(size_t rows, size_t cols) {
  m_.emplace_back(rows, cols);
  v_.emplace_back(rows, cols);
}

void AdamState::step(const std::vector<Tensor*>& params,
                     const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam: parameter count does not match registered slots");
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    if (!p.same_shape(m) || !g.same_shape(m)) {
      throw ShapeError("adam: slot " + std::to_string(k) + " shape " +
                       m.shape_str() + " vs param " + p.shape_str() +
                       " grad " + g.shape_str());
    }
    for (size_t i = 0; i < p.numel(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * gi;
      v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * gi * gi;
      const double mhat = m.data()[i] / bc1;
      const double vhat = v.data()[i] / bc2;
      p.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

double clip_gradients(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.data()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Tensor& g : grads) {
      for (double& v : g.data()) v *= scale;
    }
  }
  return norm;
}

void apply_weight_decay(std::vector<Tensor>& grads,
                        const std::vector<Tensor*>& params, double decay) {
  if (decay == 0.0) return;
  if (grads.size() != params.size()) {
    throw ShapeError("weight decay: gradient/parameter count mismatch");
  }
  for (size_t k = 0; k < grads.size(); ++k) {
    for (size_t i = 0; i < grads[k].numel(); ++i) {
      grads[k].data()[i] += decay * params[k]->data()[i];
    }
  }
}

}  // namespace kglink
