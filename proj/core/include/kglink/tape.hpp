#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kglink/tensor.hpp"

namespace kglink {

// Handle to a value recorded on a tape.
struct Var {
  uint32_t id = 0;
};

// Reverse-mode autodiff tape. Operations append records in forward order;
// backward() walks them once in reverse, accumulating gradients additively.
//
// In checked mode every primitive verifies its output is finite and throws
// NumericError otherwise. The tape is single-threaded; independent tapes may
// run concurrently.
class Tape {
 public:
  explicit Tape(bool checked = true) : checked_(checked) {}

  // Leaf without a gradient slot (graph structure, labels, masks).
  Var constant(Tensor value);
  // Leaf with a gradient slot (trainable parameter bound for this pass).
  Var param(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  // Gradient accumulated for v by the last backward(); zeros if v was not
  // reachable from the loss.
  Tensor grad(Var v) const;

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);             // same shape
  Var add_bias(Var x, Var bias);     // (m,n) + (1,n), row broadcast
  Var mul(Var a, Var b);             // elementwise
  Var scale(Var a, double c);
  Var concat_cols(Var a, Var b);
  Var concat_rows(const std::vector<Var>& parts);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var gather_rows(Var table, std::vector<uint32_t> rows);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var sum_rows(Var x);   // (m,n) -> (1,n)
  Var mean_rows(Var x);  // (m,n) -> (1,n)
  Var sum_all(Var x);    // (m,n) -> (1,1)
  Var softmax_cross_entropy(Var logits, Var onehot);  // -> (1,1)

  // Backpropagate from a scalar loss. May be called once per tape.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }
  bool checked() const { return checked_; }

 private:
  struct Node {
    Tensor value;
    bool needs_grad = false;
    std::function<void(Tape&, const Tensor&)> backprop;  // empty for leaves
  };

  Var push(Tensor value, bool needs_grad,
           std::function<void(Tape&, const Tensor&)> backprop);
  void accumulate(uint32_t id, Tensor g);
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  void check_finite(const Tensor& t, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;  // empty tensor = untouched
  bool checked_;
  bool backward_done_ = false;
};

}  // namespace kglink
