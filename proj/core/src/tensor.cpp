#include "kglink/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kglink/errors.hpp"

namespace kglink {

Tensor Tensor::full(size_t rows, size_t cols, double v) {
  Tensor t(rows, cols);
  std::fill(t.data_.begin(), t.data_.end(), v);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t(1, 1);
  t.data_[0] = v;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(rows.size(), rows.begin()->size());
  size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != t.cols()) {
      throw ShapeError("from_rows: ragged row lengths");
    }
    size_t j = 0;
    for (double v : r) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

void Tensor::reshape(std::vector<size_t> shape) {
  size_t n = 1;
  for (size_t e : shape) n *= e;
  if (n != data_.size()) {
    throw ShapeError("reshape: element count mismatch");
  }
  shape_ = std::move(shape);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item: tensor " + shape_str() + " is not a scalar");
  }
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_in_place(const Tensor& o) {
  if (!same_shape(o)) {
    throw ShapeError("add_in_place: " + shape_str() + " vs " + o.shape_str());
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
}

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_str() + " vs " + b.shape_str());
  }
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out(m, n);
  for (size_t i = 0; i < m; ++i) {
    const double* ar = a.row(i);
    double* orow = out.row(i);
    for (size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      if (av == 0.0) continue;  // incidence matrices are mostly zeros
      const double* br = b.row(p);
      for (size_t j = 0; j < n; ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: " + a.shape_str() + " vs " + b.shape_str());
  }
  const size_t k = a.rows(), m = a.cols(), n = b.cols();
  Tensor out(m, n);
  for (size_t p = 0; p < k; ++p) {
    const double* ar = a.row(p);
    const double* br = b.row(p);
    for (size_t i = 0; i < m; ++i) {
      const double av = ar[i];
      if (av == 0.0) continue;
      double* orow = out.row(i);
      for (size_t j = 0; j < n; ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + a.shape_str() + " vs " + b.shape_str());
  }
  const size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor out(m, n);
  for (size_t i = 0; i < m; ++i) {
    const double* ar = a.row(i);
    double* orow = out.row(i);
    for (size_t j = 0; j < n; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += ar[p] * br[p];
      orow[j] = acc;
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  }
  return out;
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor out(logits.rows(), logits.cols());
  for (size_t i = 0; i < logits.rows(); ++i) {
    const double* z = logits.row(i);
    double mx = z[0];
    for (size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (size_t j = 0; j < logits.cols(); ++j) {
      out.at(i, j) = std::exp(z[j] - mx);
      sum += out.at(i, j);
    }
    for (size_t j = 0; j < logits.cols(); ++j) out.at(i, j) /= sum;
  }
  return out;
}

}  // namespace kglink
