#include "kglink/tape.hpp"

#include <cmath>
#include <utility>

#include "kglink/errors.hpp"

namespace kglink {

Var Tape::push(Tensor value, bool needs_grad,
               std::function<void(Tape&, const Tensor&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  grads_.emplace_back();
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

void Tape::check_finite(const Tensor& t, const char* op) const {
  if (checked_ && !t.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

void Tape::accumulate(uint32_t id, Tensor g) {
  if (grads_[id].empty()) {
    grads_[id] = std::move(g);
  } else {
    grads_[id].add_in_place(g);
  }
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, {}); }

Var Tape::param(Tensor value) { return push(std::move(value), true, {}); }

Tensor Tape::grad(Var v) const {
  const Tensor& g = grads_[v.id];
  if (g.empty()) {
    const Tensor& val = nodes_[v.id].value;
    return Tensor::zeros(val.rows(), val.cols());
  }
  return g;
}

Var Tape::matmul(Var a, Var b) {
  Tensor out = matmul_nn(value(a), value(b));
  check_finite(out, "matmul");
  bool ng = needs_grad(a) || needs_grad(b);
  return push(std::move(out), ng, [a, b](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) t.accumulate(a.id, matmul_nt(g, t.value(b)));
    if (t.needs_grad(b)) t.accumulate(b.id, matmul_tn(t.value(a), g));
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) {
    throw ShapeError("add: " + va.shape_str() + " vs " + vb.shape_str());
  }
  Tensor out = va;
  out.add_in_place(vb);
  check_finite(out, "add");
  bool ng = needs_grad(a) || needs_grad(b);
  return push(std::move(out), ng, [a, b](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) t.accumulate(a.id, g);
    if (t.needs_grad(b)) t.accumulate(b.id, g);
  });
}

Var Tape::add_bias(Var x, Var bias) {
  const Tensor& vx = value(x);
  const Tensor& vb = value(bias);
  if (vb.rows() != 1 || vb.cols() != vx.cols()) {
    throw ShapeError("add_bias: " + vx.shape_str() + " vs " + vb.shape_str());
  }
  Tensor out = vx;
  for (size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    const double* b = vb.row(0);
    for (size_t j = 0; j < out.cols(); ++j) r[j] += b[j];
  }
  check_finite(out, "add_bias");
  bool ng = needs_grad(x) || needs_grad(bias);
  return push(std::move(out), ng, [x, bias](Tape& t, const Tensor& g) {
    if (t.needs_grad(x)) t.accumulate(x.id, g);
    if (t.needs_grad(bias)) {
      Tensor db(1, g.cols());
      for (size_t i = 0; i < g.rows(); ++i) {
        const double* r = g.row(i);
        for (size_t j = 0; j < g.cols(); ++j) db.at(0, j) += r[j];
      }
      t.accumulate(bias.id, std::move(db));
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) {
    throw ShapeError("mul: " + va.shape_str() + " vs " + vb.shape_str());
  }
  Tensor out = va;
  for (size_t i = 0; i < out.numel(); ++i) out.data()[i] *= vb.data()[i];
  check_finite(out, "mul");
  bool ng = needs_grad(a) || needs_grad(b);
  return push(std::move(out), ng, [a, b](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) {
      Tensor da = g;
      const Tensor& vb2 = t.value(b);
      for (size_t i = 0; i < da.numel(); ++i) da.data()[i] *= vb2.data()[i];
      t.accumulate(a.id, std::move(da));
    }
    if (t.needs_grad(b)) {
      Tensor db = g;
      const Tensor& va2 = t.value(a);
      for (size_t i = 0; i < db.numel(); ++i) db.data()[i] *= va2.data()[i];
      t.accumulate(b.id, std::move(db));
    }
  });
}

Var Tape::scale(Var a, double c) {
  Tensor out = value(a);
  for (double& v : out.data()) v *= c;
  check_finite(out, "scale");
  return push(std::move(out), needs_grad(a), [a, c](Tape& t, const Tensor& g) {
    if (!t.needs_grad(a)) return;
    Tensor da = g;
    for (double& v : da.data()) v *= c;
    t.accumulate(a.id, std::move(da));
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rows() != vb.rows()) {
    throw ShapeError("concat_cols: " + va.shape_str() + " vs " + vb.shape_str());
  }
  Tensor out(va.rows(), va.cols() + vb.cols());
  for (size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    const double* ra = va.row(i);
    const double* rb = vb.row(i);
    for (size_t j = 0; j < va.cols(); ++j) r[j] = ra[j];
    for (size_t j = 0; j < vb.cols(); ++j) r[va.cols() + j] = rb[j];
  }
  bool ng = needs_grad(a) || needs_grad(b);
  size_t ca = va.cols();
  return push(std::move(out), ng, [a, b, ca](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) {
      Tensor da(g.rows(), ca);
      for (size_t i = 0; i < g.rows(); ++i) {
        for (size_t j = 0; j < ca; ++j) da.at(i, j) = g.at(i, j);
      }
      t.accumulate(a.id, std::move(da));
    }
    if (t.needs_grad(b)) {
      size_t cb = g.cols() - ca;
      Tensor db(g.rows(), cb);
      for (size_t i = 0; i < g.rows(); ++i) {
        for (size_t j = 0; j < cb; ++j) db.at(i, j) = g.at(i, ca + j);
      }
      t.accumulate(b.id, std::move(db));
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  size_t cols = value(parts[0]).cols();
  size_t rows = 0;
  bool ng = false;
  for (Var p : parts) {
    const Tensor& v = value(p);
    if (v.cols() != cols) {
      throw ShapeError("concat_rows: " + value(parts[0]).shape_str() + " vs " +
                       v.shape_str());
    }
    rows += v.rows();
    ng = ng || needs_grad(p);
  }
  Tensor out(rows, cols);
  size_t at = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    for (size_t i = 0; i < v.rows(); ++i) {
      const double* src = v.row(i);
      double* dst = out.row(at + i);
      for (size_t j = 0; j < cols; ++j) dst[j] = src[j];
    }
    at += v.rows();
  }
  std::vector<Var> ps = parts;
  return push(std::move(out), ng, [ps](Tape& t, const Tensor& g) {
    size_t at2 = 0;
    for (Var p : ps) {
      const Tensor& v = t.value(p);
      if (t.needs_grad(p)) {
        Tensor dp(v.rows(), v.cols());
        for (size_t i = 0; i < v.rows(); ++i) {
          const double* src = g.row(at2 + i);
          double* dst = dp.row(i);
          for (size_t j = 0; j < v.cols(); ++j) dst[j] = src[j];
        }
        t.accumulate(p.id, std::move(dp));
      }
      at2 += v.rows();
    }
  });
}

Var Tape::relu(Var a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  check_finite(out, "relu");
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Tensor& g) {
    if (!t.needs_grad(a)) return;
    Tensor da = g;
    const Tensor& va = t.value(a);
    for (size_t i = 0; i < da.numel(); ++i) {
      if (va.data()[i] <= 0.0) da.data()[i] = 0.0;
    }
    t.accumulate(a.id, std::move(da));
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  check_finite(out, "sigmoid");
  Var self{static_cast<uint32_t>(nodes_.size())};
  return push(std::move(out), needs_grad(a), [a, self](Tape& t, const Tensor& g) {
    if (!t.needs_grad(a)) return;
    Tensor da = g;
    const Tensor& y = t.value(self);
    for (size_t i = 0; i < da.numel(); ++i) {
      double s = y.data()[i];
      da.data()[i] *= s * (1.0 - s);
    }
    t.accumulate(a.id, std::move(da));
  });
}

Var Tape::tanh(Var a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = std::tanh(v);
  check_finite(out, "tanh");
  Var self{static_cast<uint32_t>(nodes_.size())};
  return push(std::move(out), needs_grad(a), [a, self](Tape& t, const Tensor& g) {
    if (!t.needs_grad(a)) return;
    Tensor da = g;
    const Tensor& y = t.value(self);
    for (size_t i = 0; i < da.numel(); ++i) {
      double s = y.data()[i];
      da.data()[i] *= 1.0 - s * s;
    }
    t.accumulate(a.id, std::move(da));
  });
}

Var Tape::gather_rows(Var table, std::vector<uint32_t> rows) {
  const Tensor& vt = value(table);
  Tensor out(rows.size(), vt.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= vt.rows()) {
      throw InputError("gather_rows: index " + std::to_string(rows[i]) +
                       " out of bounds for table " + vt.shape_str());
    }
    const double* src = vt.row(rows[i]);
    double* dst = out.row(i);
    for (size_t j = 0; j < vt.cols(); ++j) dst[j] = src[j];
  }
  return push(std::move(out), needs_grad(table),
              [table, rows = std::move(rows)](Tape& t, const Tensor& g) {
                if (!t.needs_grad(table)) return;
                const Tensor& vt2 = t.value(table);
                Tensor dt(vt2.rows(), vt2.cols());
                for (size_t i = 0; i < rows.size(); ++i) {
                  const double* src = g.row(i);
                  double* dst = dt.row(rows[i]);
                  for (size_t j = 0; j < g.cols(); ++j) dst[j] += src[j];
                }
                t.accumulate(table.id, std::move(dt));
              });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& vx = value(x);
  const Tensor& vg = value(gain);
  const Tensor& vb = value(bias);
  const size_t n = vx.cols();
  if (vg.rows() != 1 || vg.cols() != n || vb.rows() != 1 || vb.cols() != n) {
    throw ShapeError("layer_norm: " + vx.shape_str() + " with gain " +
                     vg.shape_str() + " bias " + vb.shape_str());
  }
  Tensor xhat(vx.rows(), n);
  Tensor inv_std(vx.rows(), 1);
  Tensor out(vx.rows(), n);
  for (size_t i = 0; i < vx.rows(); ++i) {
    const double* r = vx.row(i);
    double mean = 0.0;
    for (size_t j = 0; j < n; ++j) mean += r[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t j = 0; j < n; ++j) {
      double d = r[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std.at(i, 0) = inv;
    for (size_t j = 0; j < n; ++j) {
      double xh = (r[j] - mean) * inv;
      xhat.at(i, j) = xh;
      out.at(i, j) = vg.at(0, j) * xh + vb.at(0, j);
    }
  }
  check_finite(out, "layer_norm");
  bool ng = needs_grad(x) || needs_grad(gain) || needs_grad(bias);
  return push(std::move(out), ng,
              [x, gain, bias, xhat = std::move(xhat),
               inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
                const size_t m = g.rows(), n2 = g.cols();
                if (t.needs_grad(gain)) {
                  Tensor dg(1, n2);
                  for (size_t i = 0; i < m; ++i) {
                    for (size_t j = 0; j < n2; ++j) {
                      dg.at(0, j) += g.at(i, j) * xhat.at(i, j);
                    }
                  }
                  t.accumulate(gain.id, std::move(dg));
                }
                if (t.needs_grad(bias)) {
                  Tensor db(1, n2);
                  for (size_t i = 0; i < m; ++i) {
                    for (size_t j = 0; j < n2; ++j) db.at(0, j) += g.at(i, j);
                  }
                  t.accumulate(bias.id, std::move(db));
                }
                if (t.needs_grad(x)) {
                  const Tensor& vg2 = t.value(gain);
                  Tensor dx(m, n2);
                  for (size_t i = 0; i < m; ++i) {
                    double mean_h = 0.0, mean_hx = 0.0;
                    for (size_t j = 0; j < n2; ++j) {
                      double h = g.at(i, j) * vg2.at(0, j);
                      mean_h += h;
                      mean_hx += h * xhat.at(i, j);
                    }
                    mean_h /= static_cast<double>(n2);
                    mean_hx /= static_cast<double>(n2);
                    double inv = inv_std.at(i, 0);
                    for (size_t j = 0; j < n2; ++j) {
                      double h = g.at(i, j) * vg2.at(0, j);
                      dx.at(i, j) = inv * (h - mean_h - xhat.at(i, j) * mean_hx);
                    }
                  }
                  t.accumulate(x.id, std::move(dx));
                }
              });
}

Var Tape::sum_rows(Var x) {
  const Tensor& vx = value(x);
  Tensor out(1, vx.cols());
  for (size_t i = 0; i < vx.rows(); ++i) {
    const double* r = vx.row(i);
    for (size_t j = 0; j < vx.cols(); ++j) out.at(0, j) += r[j];
  }
  check_finite(out, "sum_rows");
  return push(std::move(out), needs_grad(x), [x](Tape& t, const Tensor& g) {
    if (!t.needs_grad(x)) return;
    const Tensor& vx2 = t.value(x);
    Tensor dx(vx2.rows(), vx2.cols());
    for (size_t i = 0; i < dx.rows(); ++i) {
      double* r = dx.row(i);
      for (size_t j = 0; j < dx.cols(); ++j) r[j] = g.at(0, j);
    }
    t.accumulate(x.id, std::move(dx));
  });
}

Var Tape::mean_rows(Var x) {
  const Tensor& vx = value(x);
  if (vx.rows() == 0) throw ShapeError("mean_rows: empty input");
  const double scale = 1.0 / static_cast<double>(vx.rows());
  Tensor out(1, vx.cols());
  for (size_t i = 0; i < vx.rows(); ++i) {
    const double* r = vx.row(i);
    for (size_t j = 0; j < vx.cols(); ++j) out.at(0, j) += r[j] * scale;
  }
  check_finite(out, "mean_rows");
  return push(std::move(out), needs_grad(x), [x, scale](Tape& t, const Tensor& g) {
    if (!t.needs_grad(x)) return;
    const Tensor& vx2 = t.value(x);
    Tensor dx(vx2.rows(), vx2.cols());
    for (size_t i = 0; i < dx.rows(); ++i) {
      double* r = dx.row(i);
      for (size_t j = 0; j < dx.cols(); ++j) r[j] = g.at(0, j) * scale;
    }
    t.accumulate(x.id, std::move(dx));
  });
}

Var Tape::sum_all(Var x) {
  const Tensor& vx = value(x);
  double acc = 0.0;
  for (double v : vx.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  check_finite(out, "sum_all");
  return push(std::move(out), needs_grad(x), [x](Tape& t, const Tensor& g) {
    if (!t.needs_grad(x)) return;
    const Tensor& vx2 = t.value(x);
    t.accumulate(x.id, Tensor::full(vx2.rows(), vx2.cols(), g.item()));
  });
}

Var Tape::softmax_cross_entropy(Var logits, Var onehot) {
  const Tensor& z = value(logits);
  const Tensor& y = value(onehot);
  if (!z.same_shape(y)) {
    throw ShapeError("softmax_cross_entropy: " + z.shape_str() + " vs " +
                     y.shape_str());
  }
  const size_t b = z.rows(), c = z.cols();
  for (size_t i = 0; i < b; ++i) {
    size_t ones = 0;
    for (size_t j = 0; j < c; ++j) {
      double v = y.at(i, j);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        throw InputError("softmax_cross_entropy: labels must be one-hot");
      }
    }
    if (ones != 1) {
      throw InputError("softmax_cross_entropy: labels must be one-hot");
    }
  }
  Tensor probs = softmax_rows(z);
  double loss = 0.0;
  for (size_t i = 0; i < b; ++i) {
    const double* zr = z.row(i);
    double mx = zr[0];
    for (size_t j = 1; j < c; ++j) mx = std::max(mx, zr[j]);
    double lse = 0.0;
    for (size_t j = 0; j < c; ++j) lse += std::exp(zr[j] - mx);
    lse = mx + std::log(lse);
    for (size_t j = 0; j < c; ++j) {
      if (y.at(i, j) == 1.0) loss += lse - zr[j];
    }
  }
  loss /= static_cast<double>(b);
  Tensor out = Tensor::scalar(loss);
  check_finite(out, "softmax_cross_entropy");
  return push(std::move(out), needs_grad(logits),
              [logits, onehot, probs = std::move(probs)](Tape& t, const Tensor& g) {
                if (!t.needs_grad(logits)) return;
                const Tensor& y2 = t.value(onehot);
                const double scale = g.item() / static_cast<double>(probs.rows());
                Tensor dz = probs;
                for (size_t i = 0; i < dz.numel(); ++i) {
                  dz.data()[i] = (dz.data()[i] - y2.data()[i]) * scale;
                }
                t.accumulate(logits.id, std::move(dz));
              });
}

void Tape::backward(Var loss) {
  if (backward_done_) {
    throw Error("backward: tape already consumed; build a fresh tape");
  }
  backward_done_ = true;
  const Tensor& lv = value(loss);
  if (lv.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + lv.shape_str());
  }
  accumulate(loss.id, Tensor::scalar(1.0));
  for (uint32_t id = loss.id + 1; id-- > 0;) {
    if (grads_[id].empty()) continue;
    if (nodes_[id].backprop) nodes_[id].backprop(*this, grads_[id]);
  }
}

}  // namespace kglink
