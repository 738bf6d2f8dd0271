#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace kglink {

// Dense row-major matrix of doubles. The shape is kept as an explicit extent
// list so embedding tables, activations and 1x1 scalars share one type.
class Tensor {
 public:
  Tensor() = default;
  Tensor(size_t rows, size_t cols)
      : shape_{rows, cols}, data_(rows * cols, 0.0) {}

  static Tensor zeros(size_t rows, size_t cols) { return Tensor(rows, cols); }
  static Tensor full(size_t rows, size_t cols, double v);
  static Tensor scalar(double v);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  size_t cols() const { return shape_.size() < 2 ? (shape_.empty() ? 0 : 1) : shape_[1]; }
  size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  const std::vector<size_t>& shape() const { return shape_; }
  void reshape(std::vector<size_t> shape);
  std::string shape_str() const;

  double& at(size_t i, size_t j) { return data_[i * cols() + j]; }
  double at(size_t i, size_t j) const { return data_[i * cols() + j]; }
  double* row(size_t i) { return data_.data() + i * cols(); }
  const double* row(size_t i) const { return data_.data() + i * cols(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  double item() const;  // value of a 1x1 tensor

  void fill(double v);
  void add_in_place(const Tensor& o);

  bool operator==(const Tensor& o) const {
    return shape_ == o.shape_ && data_ == o.data_;
  }

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

// Matmul kernels shared by the tape primitives and their vector-Jacobian
// products. Suffix picks which operand is transposed.
Tensor matmul_nn(const Tensor& a, const Tensor& b);  // a * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a' * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b'
Tensor transpose(const Tensor& a);

// Row-wise softmax, used for prediction output and by tests.
Tensor softmax_rows(const Tensor& logits);

}  // namespace kglink
