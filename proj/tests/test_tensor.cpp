#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kglink/adam.hpp"
#include "kglink/checkpoint.hpp"
#include "kglink/errors.hpp"
#include "kglink/rng.hpp"
#include "kglink/tape.hpp"
#include "kglink/tensor.hpp"
#include "oracles.hpp"

using namespace kglink;

namespace {

Tensor random_tensor(Rng& rng, size_t rows, size_t cols, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.data()) {
    v = rng.uniform(lo, hi);
    // keep clear of the relu kink so finite differences stay clean
    if (std::abs(v) < 0.02) v += v < 0 ? -0.05 : 0.05;
  }
  return t;
}

// Finite-difference check of one primitive against its tape gradient. The
// loss is a fixed random weighting of the op output so every output element
// contributes to the Jacobian check.
void fd_check(const std::string& name, std::vector<Tensor> inputs,
              const std::function<Var(Tape&, const std::vector<Var>&)>& build,
              double tol = 1e-6) {
  Tensor weights;
  auto run = [&](std::vector<Tensor>* grads) -> double {
    Tape tape(true);
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.param(t));
    Var out = build(tape, vars);
    if (weights.empty()) {
      Rng wr(4242);
      weights = random_tensor(wr, tape.value(out).rows(), tape.value(out).cols());
    }
    Var loss = tape.sum_all(tape.mul(out, tape.constant(weights)));
    const double value = tape.value(loss).item();
    if (grads) {
      tape.backward(loss);
      for (Var v : vars) grads->push_back(tape.grad(v));
    }
    return value;
  };

  std::vector<Tensor> analytic;
  run(&analytic);

  oracle::GradCheck gc;
  for (size_t k = 0; k < inputs.size(); ++k) {
    for (size_t i = 0; i < inputs[k].numel(); ++i) {
      const double fd = oracle::central_difference(
          [&]() { return run(nullptr); }, &inputs[k].data()[i], 1e-5);
      oracle::check_component(gc,
                              name + " input" + std::to_string(k) + "[" +
                                  std::to_string(i) + "]",
                              analytic[k].data()[i], fd);
    }
  }
  INFO(name << " worst component: " << gc.worst << " rel err " << gc.max_rel_err);
  CHECK(gc.max_rel_err < tol);
}

}  // namespace

TEST_CASE("relu forward") {
  Tape tape;
  Var x = tape.constant(Tensor::from_rows({{-1.0, 0.0, 2.0}}));
  const Tensor& y = tape.value(tape.relu(x));
  CHECK(y.at(0, 0) == 0.0);
  CHECK(y.at(0, 1) == 0.0);
  CHECK(y.at(0, 2) == 2.0);
}

TEST_CASE("layer_norm of a constant row is the bias") {
  Tape tape;
  Var x = tape.constant(Tensor::full(2, 4, 3.7));
  Var gain = tape.constant(Tensor::full(1, 4, 1.0));
  Var bias = tape.constant(Tensor(1, 4));
  const Tensor& y = tape.value(tape.layer_norm(x, gain, bias));
  for (size_t i = 0; i < y.rows(); ++i) {
    for (size_t j = 0; j < y.cols(); ++j) CHECK(y.at(i, j) == doctest::Approx(0.0));
  }
}

TEST_CASE("shape mismatches name both shapes") {
  Tape tape;
  Var a = tape.constant(Tensor(2, 3));
  Var b = tape.constant(Tensor(4, 2));
  try {
    tape.matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("(2x3)") != std::string::npos);
    CHECK(msg.find("(4x2)") != std::string::npos);
  }
  CHECK_THROWS_AS(tape.add(a, b), ShapeError);
  CHECK_THROWS_AS(tape.mul(a, b), ShapeError);
  CHECK_THROWS_AS(tape.concat_cols(a, b), ShapeError);
}

TEST_CASE("checked mode flags non-finite values") {
  Tape tape(true);
  Var a = tape.constant(Tensor::full(1, 2, 1e308));
  CHECK_THROWS_AS(tape.add(a, a), NumericError);
  Tape unchecked(false);
  Var b = unchecked.constant(Tensor::full(1, 2, 1e308));
  CHECK_NOTHROW(unchecked.add(b, b));
}

TEST_CASE("every primitive matches central finite differences") {
  Rng rng(7);

  fd_check("matmul", {random_tensor(rng, 3, 4), random_tensor(rng, 4, 2)},
           [](Tape& t, const std::vector<Var>& v) { return t.matmul(v[0], v[1]); });
  fd_check("add", {random_tensor(rng, 3, 4), random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.add(v[0], v[1]); });
  fd_check("add_bias", {random_tensor(rng, 3, 4), random_tensor(rng, 1, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.add_bias(v[0], v[1]); });
  fd_check("mul", {random_tensor(rng, 3, 4), random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.mul(v[0], v[1]); });
  fd_check("scale", {random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.scale(v[0], -2.5); });
  fd_check("concat_cols", {random_tensor(rng, 3, 2), random_tensor(rng, 3, 5)},
           [](Tape& t, const std::vector<Var>& v) { return t.concat_cols(v[0], v[1]); });
  fd_check("concat_rows",
           {random_tensor(rng, 2, 3), random_tensor(rng, 1, 3),
            random_tensor(rng, 4, 3)},
           [](Tape& t, const std::vector<Var>& v) {
             return t.concat_rows({v[0], v[1], v[2]});
           });
  fd_check("relu", {random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.relu(v[0]); });
  fd_check("sigmoid", {random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.sigmoid(v[0]); });
  fd_check("tanh", {random_tensor(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) { return t.tanh(v[0]); });
  fd_check("gather_rows", {random_tensor(rng, 5, 3)},
           [](Tape& t, const std::vector<Var>& v) {
             return t.gather_rows(v[0], {4, 0, 2, 0, 0});
           });
  fd_check("layer_norm",
           {random_tensor(rng, 3, 6), random_tensor(rng, 1, 6),
            random_tensor(rng, 1, 6)},
           [](Tape& t, const std::vector<Var>& v) {
             return t.layer_norm(v[0], v[1], v[2]);
           },
           1e-5);
  fd_check("sum_rows", {random_tensor(rng, 4, 3)},
           [](Tape& t, const std::vector<Var>& v) { return t.sum_rows(v[0]); });
  fd_check("mean_rows", {random_tensor(rng, 4, 3)},
           [](Tape& t, const std::vector<Var>& v) { return t.mean_rows(v[0]); });
  fd_check("softmax_cross_entropy", {random_tensor(rng, 3, 5)},
           [](Tape& t, const std::vector<Var>& v) {
             Tensor labels(3, 5);
             labels.at(0, 2) = 1.0;
             labels.at(1, 0) = 1.0;
             labels.at(2, 4) = 1.0;
             return t.softmax_cross_entropy(v[0], t.constant(labels));
           });
}

TEST_CASE("uniform logits give ln C") {
  Tape tape;
  Var logits = tape.constant(Tensor(1, 47));
  Tensor label(1, 47);
  label.at(0, 13) = 1.0;
  Var loss = tape.softmax_cross_entropy(logits, tape.constant(label));
  CHECK(tape.value(loss).item() == doctest::Approx(std::log(47.0)).epsilon(1e-12));
  CHECK(std::log(47.0) == doctest::Approx(3.8501).epsilon(1e-4));
}

TEST_CASE("extreme logits stay stable") {
  Tape tape;
  Tensor z(1, 3);
  z.at(0, 0) = 1000.0;
  Tensor label(1, 3);
  label.at(0, 0) = 1.0;
  Var loss = tape.softmax_cross_entropy(tape.constant(z), tape.constant(label));
  CHECK(tape.value(loss).item() == doctest::Approx(0.0));
  CHECK(std::isfinite(tape.value(loss).item()));
}

TEST_CASE("batch loss is the mean of per-row losses") {
  Rng rng(21);
  Tensor z = random_tensor(rng, 2, 6, -3.0, 3.0);
  Tensor y(2, 6);
  y.at(0, 1) = 1.0;
  y.at(1, 4) = 1.0;

  auto single = [&](size_t row) {
    Tape tape;
    Tensor zr(1, 6), yr(1, 6);
    for (size_t j = 0; j < 6; ++j) {
      zr.at(0, j) = z.at(row, j);
      yr.at(0, j) = y.at(row, j);
    }
    return tape.value(tape.softmax_cross_entropy(tape.constant(zr),
                                                 tape.constant(yr)))
        .item();
  };
  Tape tape;
  double batched =
      tape.value(tape.softmax_cross_entropy(tape.constant(z), tape.constant(y)))
          .item();
  CHECK(batched == doctest::Approx((single(0) + single(1)) / 2.0).epsilon(1e-14));
}

TEST_CASE("cross entropy matches the direct formula transcription") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor z = random_tensor(rng, 4, 7, -4.0, 4.0);
    Tensor y(4, 7);
    for (size_t i = 0; i < 4; ++i) y.at(i, rng.below(7)) = 1.0;
    Tape tape;
    double ours =
        tape.value(tape.softmax_cross_entropy(tape.constant(z), tape.constant(y)))
            .item();
    CHECK(std::abs(ours - oracle::cross_entropy_direct(z, y)) < 1e-12);
  }
}

TEST_CASE("softmax rows sum to one and cross entropy is nonnegative") {
  Rng rng(41);
  Tensor z = random_tensor(rng, 8, 9, -10.0, 10.0);
  Tensor p = softmax_rows(z);
  for (size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < p.cols(); ++j) sum += p.at(i, j);
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  for (int trial = 0; trial < 10; ++trial) {
    Tensor y(8, 9);
    for (size_t i = 0; i < 8; ++i) y.at(i, rng.below(9)) = 1.0;
    Tape tape;
    CHECK(tape.value(tape.softmax_cross_entropy(tape.constant(z), tape.constant(y)))
              .item() >= 0.0);
  }
}

TEST_CASE("non-one-hot labels rejected") {
  Tape tape;
  Var z = tape.constant(Tensor(1, 3));
  Tensor two_hot(1, 3);
  two_hot.at(0, 0) = 1.0;
  two_hot.at(0, 1) = 1.0;
  CHECK_THROWS_AS(tape.softmax_cross_entropy(z, tape.constant(two_hot)), InputError);
  Tensor soft(1, 3);
  soft.at(0, 0) = 0.5;
  soft.at(0, 1) = 0.5;
  CHECK_THROWS_AS(tape.softmax_cross_entropy(z, tape.constant(soft)), InputError);
}

TEST_CASE("backward of a sum is all ones") {
  Tape tape;
  Var p = tape.param(Tensor::full(3, 2, 0.5));
  Var loss = tape.sum_all(p);
  tape.backward(loss);
  Tensor g = tape.grad(p);
  for (double v : g.data()) CHECK(v == 1.0);
}

TEST_CASE("unused parameters get zero gradients") {
  Tape tape;
  Var used = tape.param(Tensor::full(1, 2, 1.0));
  Var unused = tape.param(Tensor::full(4, 4, 2.0));
  Var loss = tape.sum_all(used);
  tape.backward(loss);
  Tensor g = tape.grad(unused);
  CHECK(g.rows() == 4);
  CHECK(g.cols() == 4);
  for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("backward twice is an error") {
  Tape tape;
  Var p = tape.param(Tensor::full(1, 1, 1.0));
  Var loss = tape.sum_all(p);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), Error);
}

TEST_CASE("tape replay is bitwise deterministic") {
  auto run = [] {
    Rng rng(17);
    Tensor a = random_tensor(rng, 4, 5);
    Tensor b = random_tensor(rng, 5, 3);
    Tape tape;
    Var va = tape.param(a);
    Var vb = tape.param(b);
    Var out = tape.sigmoid(tape.matmul(va, vb));
    Var loss = tape.sum_all(out);
    tape.backward(loss);
    return std::make_pair(tape.value(loss).item(), tape.grad(va).data());
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("adam matches a hand-computed first step") {
  AdamState adam(0.1);
  adam.register_param(1, 1);
  Tensor p = Tensor::scalar(1.0);
  Tensor g = Tensor::scalar(0.5);
  adam.step({&p}, {g});

  // by hand: m = 0.1*0.5/(1-0.9) = 0.5 after bias correction;
  // v = 0.001*0.25/(1-0.999) = 0.25; update = 0.1 * 0.5/(sqrt(0.25)+1e-8)
  const double m_hat = (0.1 * 0.5) / (1.0 - 0.9);
  const double v_hat = (0.001 * 0.25) / (1.0 - 0.999);
  const double expected = 1.0 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(p.item() == doctest::Approx(expected).epsilon(1e-15));
  CHECK(p.item() < 1.0);
}

TEST_CASE("zero gradient leaves a fresh parameter unchanged") {
  AdamState adam(0.1);
  adam.register_param(2, 2);
  Tensor p = Tensor::full(2, 2, 3.0);
  adam.step({&p}, {Tensor(2, 2)});
  for (double v : p.data()) CHECK(v == 3.0);
}

TEST_CASE("identical gradients and state give identical updates") {
  AdamState adam(0.05);
  adam.register_param(1, 3);
  adam.register_param(1, 3);
  Tensor a = Tensor::full(1, 3, 1.0), b = Tensor::full(1, 3, 1.0);
  Tensor g = Tensor::from_rows({{0.3, -0.2, 0.9}});
  adam.step({&a, &b}, {g, g});
  adam.step({&a, &b}, {g, g});
  CHECK(a.data() == b.data());
}

TEST_CASE("container round-trip is bitwise") {
  Rng rng(5);
  NamedTensors tensors;
  tensors.add("alpha", random_tensor(rng, 3, 4));
  tensors.add("beta/gamma", random_tensor(rng, 1, 7));
  const auto path = std::filesystem::temp_directory_path() / "kglink_rt.kgt";
  write_container(path, tensors);
  NamedTensors loaded = read_container(path);
  REQUIRE(loaded.entries.size() == 2);
  CHECK(loaded.entries[0].first == "alpha");
  CHECK(loaded.at("alpha") == tensors.at("alpha"));
  CHECK(loaded.at("beta/gamma") == tensors.at("beta/gamma"));
  std::filesystem::remove(path);
}

TEST_CASE("f32 entries load with float precision") {
  NamedTensors tensors;
  tensors.add("w", Tensor::from_rows({{0.1, 0.25, -3.75}}));
  const auto path = std::filesystem::temp_directory_path() / "kglink_f32.kgt";
  write_container(path, tensors, Precision::f32);
  NamedTensors loaded = read_container(path);
  CHECK(loaded.at("w").at(0, 1) == 0.25);  // exactly representable
  CHECK(loaded.at("w").at(0, 0) ==
        doctest::Approx(0.1).epsilon(1e-7));  // narrowed to float
  std::filesystem::remove(path);
}

TEST_CASE("corrupt or mismatched container headers are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "kglink_bad.kgt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(read_container(path), IoError);
  {
    // right magic, bumped version
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const char bytes[] = {'K', 'G', 'T', 'C', 9, 0, 0, 0};
    out.write(bytes, sizeof(bytes));
  }
  CHECK_THROWS_AS(read_container(path), IoError);
  {
    // truncated entry table
    NamedTensors tensors;
    tensors.add("w", Tensor(2, 2));
    write_container(path, tensors);
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 5);
  }
  CHECK_THROWS_AS(read_container(path), IoError);
  std::filesystem::remove(path);
}
