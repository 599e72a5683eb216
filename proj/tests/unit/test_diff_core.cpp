// Copyright 2026 The fairpath Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fairpath/dual.hpp"
#include "fairpath/finite_diff.hpp"
#include "fairpath/mlp.hpp"
#include "fairpath/tape.hpp"
#include "helpers.hpp"

using namespace fairpath;
using fairpath::testing::random_matrix;

namespace {

std::vector<int> random_labels(Rng& rng, int n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = coin(rng) ? 1 : 0;
  return y;
}

}  // namespace

TEST_CASE("reverse_grad of w^2 at 3 is 6") {
  Tape tape;
  Var w = tape.parameter(Matrix::Constant(1, 1, 3.0));
  Var f = tape.sum(tape.square(w));
  const auto grads = reverse_grad(tape, f, std::vector<Var>{w});
  CHECK(grads[0](0, 0) == 6.0);
}

TEST_CASE("reverse_grad of <w, c> is c") {
  Rng rng(7);
  const Matrix c = random_matrix(rng, 4, 3);
  Tape tape;
  Var w = tape.parameter(random_matrix(rng, 4, 3));
  const auto grads = reverse_grad(tape, tape.inner(w, tape.constant(c)), std::vector<Var>{w});
  CHECK(grads[0] == c);
}

TEST_CASE("unsupported primitive and non-scalar root are rejected") {
  Tape tape;
  Var x = tape.parameter(Matrix::Ones(2, 2));
  CHECK_THROWS_AS(tape.elementwise("tanh", x), UnsupportedPrimitive);
  CHECK_NOTHROW(tape.elementwise("relu", x));
  CHECK_THROWS_AS(tape.backward(tape.square(x)), ShapeError);
}

TEST_CASE("checked tape refuses non-finite values") {
  Tape tape(true);
  Matrix bad = Matrix::Ones(1, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(tape.parameter(bad), NonFiniteValue);
}

TEST_CASE("shape mismatches throw") {
  Tape tape;
  Var a = tape.parameter(Matrix::Ones(2, 2));
  Var b = tape.parameter(Matrix::Ones(3, 2));
  CHECK_THROWS_AS(tape.add(a, b), ShapeError);
  CHECK_THROWS_AS(tape.mul(a, b), ShapeError);
  CHECK_THROWS_AS(make_dual(Matrix::Ones(1, 2), Matrix::Ones(1, 3)), ShapeError);
}

TEST_CASE("two-layer MLP BCE gradient matches central differences") {
  Rng rng(11);
  const Mlp model = Mlp::init(5, {6, 8, 1});
  const Matrix x = random_matrix(rng, 20, 6);
  const auto y = random_labels(rng, 20);

  Tape tape;
  BoundMlp bound(tape, model);
  Var loss = bce_loss(tape, bound.forward(tape.constant(x)), y);
  const auto grads = reverse_grad(tape, loss, bound.params());

  const auto params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto f = [&](const Matrix& p) {
      Mlp copy = model;
      *copy.parameters()[k] = p;
      return bce_loss(copy.forward(x), y);
    };
    CHECK(finite_diff_check(f, *params[k], grads[k], 1e-6) <= 1e-5);
  }
}

TEST_CASE("forward_jvp examples") {
  Rng rng(3);
  const Matrix c = random_matrix(rng, 1, 5);
  const Matrix x = random_matrix(rng, 1, 5);
  const Matrix u = random_matrix(rng, 1, 5);
  const double jvp = forward_jvp([&](const Dual& d) { return inner(c, d); }, x, u);
  CHECK(jvp == doctest::Approx(c.cwiseProduct(u).sum()).epsilon(1e-15));

  const double s = forward_jvp([](const Dual& d) { return sigmoid(d); }, Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  CHECK(s == 0.25);
}

TEST_CASE("forward_jvp on a random MLP matches central differences") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Mlp model = Mlp::init(100 + trial, {7, 16, 16, 1});
    const Matrix x = random_matrix(rng, 1, 7);
    const Matrix u = random_matrix(rng, 1, 7);
    const double jvp = forward_jvp([&](const Dual& d) { return model.forward(d); }, x, u);
    const double h = 1e-4;
    const Matrix up = x + h * u, down = x - h * u;
    const double fd = (model.forward(up)(0, 0) - model.forward(down)(0, 0)) / (2 * h);
    CHECK(std::abs(fd - jvp) <= 1e-5 * std::max(std::abs(jvp), 1e-3));
  }
}

TEST_CASE("jvp is linear in the direction") {
  Rng rng(4);
  const Mlp model = Mlp::init(9, {4, 10, 1});
  const Matrix x = random_matrix(rng, 3, 4);
  const Matrix u = random_matrix(rng, 3, 4), w = random_matrix(rng, 3, 4);
  auto f = [&](const Dual& d) { return mean(model.forward(d)); };
  const double lhs = forward_jvp(f, x, 2.0 * u - 3.0 * w);
  const double rhs = 2.0 * forward_jvp(f, x, u) - 3.0 * forward_jvp(f, x, w);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("finite_diff_check examples") {
  auto f = [](const Matrix& p) { return p.squaredNorm() + p(0, 1) * p(0, 2); };
  Matrix p(1, 3);
  p << 0.5, -1.0, 2.0;
  Matrix exact(1, 3);
  exact << 1.0, -2.0 + 2.0, 4.0 - 1.0;
  CHECK(finite_diff_check(f, p, exact, 1e-5) <= 1e-8);

  Matrix broken = exact;
  broken(0, 2) = 0.0;
  CHECK(finite_diff_check(f, p, broken, 1e-5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS(finite_diff_check(f, p, exact, 0.0));
}

TEST_CASE("reverse_grad is linear in the expression") {
  Rng rng(8);
  const Matrix c = random_matrix(rng, 3, 3);
  for (const char* name : {"relu", "sigmoid", "abs", "square"}) {
    CAPTURE(name);
    const Matrix w0 = random_matrix(rng, 3, 3);
    auto grad_of = [&](double a, double b) {
      Tape tape;
      Var w = tape.parameter(w0);
      Var f = tape.mean(tape.elementwise(name, w));
      Var g = tape.inner(tape.constant(c), tape.sigmoid(w));
      Var root = tape.add(tape.scale(f, a), tape.scale(g, b));
      return reverse_grad(tape, root, std::vector<Var>{w})[0];
    };
    const Matrix combined = grad_of(2.5, -0.5);
    const Matrix separate = 2.5 * grad_of(1.0, 0.0) + -0.5 * grad_of(0.0, 1.0);
    CHECK((combined - separate).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("basis jvps reconstruct the reverse-mode input gradient") {
  Rng rng(12);
  const Mlp model = Mlp::init(31, {5, 12, 1});
  const Matrix x = random_matrix(rng, 1, 5);

  Tape tape;
  BoundMlp bound(tape, model);
  Var input = tape.input(x);
  Var root = tape.sum(bound.forward(input));
  tape.backward(root);
  const Matrix reverse = tape.grad(input);

  Matrix forward(1, 5);
  for (int j = 0; j < 5; ++j) {
    Matrix e = Matrix::Zero(1, 5);
    e(0, j) = 1.0;
    forward(0, j) = forward_jvp([&](const Dual& d) { return model.forward(d); }, x, e);
  }
  CHECK(max_relative_error(forward, reverse, 0.0) <= 1e-10);
}

TEST_CASE("identical expressions give bit-identical gradients") {
  Rng rng(13);
  const Mlp model = Mlp::init(1, {4, 6, 1});
  const Matrix x = random_matrix(rng, 10, 4);
  const std::vector<int> y = {0, 1, 1, 0, 1, 0, 0, 1, 1, 1};
  auto run = [&] {
    Tape tape;
    BoundMlp bound(tape, model);
    return reverse_grad(tape, bce_loss(tape, bound.forward(tape.constant(x)), y), bound.params());
  };
  const auto a = run(), b = run();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("every primitive's adjoint matches central differences") {
  Rng rng(14);
  const Matrix x0 = random_matrix(rng, 3, 4);
  const Matrix w0 = random_matrix(rng, 4, 2);
  const Matrix b0 = random_matrix(rng, 1, 2);
  const Matrix c = random_matrix(rng, 3, 2);
  // One scalar expression touching every op with a parameter on each path.
  auto build = [&](Tape& tape, Var x, Var w, Var b) {
    Var z = tape.affine(x, w, b);
    Var p = tape.sigmoid(z);
    Var q = tape.log_clamped(p, 1e-7, 1.0 - 1e-7);
    Var r = tape.mul(tape.relu(z), tape.abs(tape.scale_shift(z, 0.7, 0.1)));
    Var s = tape.concat_cols(tape.slice_rows(q, 1, 2), tape.slice_rows(r, 0, 2));
    Var t = tape.sub(tape.square(z), tape.constant(c));
    return tape.add(tape.add(tape.mean(s), tape.inner(t, tape.constant(c))), tape.sum(tape.sigmoid(z)));
  };
  Tape tape;
  Var x = tape.parameter(x0), w = tape.parameter(w0), b = tape.parameter(b0);
  const auto grads = reverse_grad(tape, build(tape, x, w, b), std::vector<Var>{x, w, b});
  auto value = [&](const Matrix& xv, const Matrix& wv, const Matrix& bv) {
    Tape t2;
    return t2.scalar(build(t2, t2.constant(xv), t2.constant(wv), t2.constant(bv)));
  };
  CHECK(finite_diff_check([&](const Matrix& p) { return value(p, w0, b0); }, x0, grads[0], 1e-6) <= 1e-6);
  CHECK(finite_diff_check([&](const Matrix& p) { return value(x0, p, b0); }, w0, grads[1], 1e-6) <= 1e-6);
  CHECK(finite_diff_check([&](const Matrix& p) { return value(x0, w0, p); }, b0, grads[2], 1e-6) <= 1e-6);
}

TEST_CASE("abs uses subgradient zero at zero") {
  Tape tape;
  Var x = tape.parameter(Matrix::Zero(1, 1));
  const auto g = reverse_grad(tape, tape.sum(tape.abs(x)), std::vector<Var>{x});
  CHECK(g[0](0, 0) == 0.0);
}
