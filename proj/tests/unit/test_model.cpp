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

#include "fairpath/finite_diff.hpp"
#include "fairpath/mlp.hpp"
#include "helpers.hpp"

using namespace fairpath;
using fairpath::testing::random_matrix;

TEST_CASE("init is deterministic and fan-in scaled") {
  const Mlp a = Mlp::init(42, {30, 200, 1});
  const Mlp b = Mlp::init(42, {30, 200, 1});
  const Mlp c = Mlp::init(43, {30, 200, 1});
  for (std::size_t k = 0; k < a.parameters().size(); ++k) CHECK(*a.parameters()[k] == *b.parameters()[k]);
  CHECK(*a.parameters()[0] != *c.parameters()[0]);

  // Empirical weight variance of the first layer against 2 / fan_in.
  const Matrix& w = a.layers()[0].weight;
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  CHECK(var == doctest::Approx(2.0 / 30.0).epsilon(0.05));
  CHECK(a.layers()[0].bias.isZero());
}

TEST_CASE("Adult-sized architectures") {
  const Mlp full = Mlp::init(0, {120, 200, 1});
  CHECK(full.num_layers() == 2);
  CHECK(full.layer_dims() == std::vector<int>{120, 200, 1});
  CHECK(full.latent_dim() == 200);
  CHECK(full.parameter_count() == 120 * 200 + 200 + 200 + 1);
  const Mlp small = Mlp::init(0, {120, 50, 1});
  CHECK(small.latent_dim() == 50);
}

TEST_CASE("invalid dims are rejected") {
  CHECK_THROWS(Mlp::init(0, {}));
  CHECK_THROWS(Mlp::init(0, {5}));
  CHECK_THROWS(Mlp::init(0, {5, 3, 2}));
  CHECK_THROWS(Mlp::init(0, {5, 0, 1}));
  CHECK_THROWS(Mlp::init(0, {5, 3, 1}, 2));
}

TEST_CASE("forward examples") {
  Mlp zero = Mlp::init(1, {4, 8, 1});
  for (Matrix* p : zero.parameters()) p->setZero();
  Rng rng(2);
  const Matrix x = random_matrix(rng, 6, 4);
  CHECK(zero.forward(x).isApprox(Matrix::Constant(6, 1, 0.5)));

  Layer linear{Matrix(3, 1), Matrix::Constant(1, 1, -0.2), Activation::kIdentity};
  linear.weight << 0.5, -1.0, 2.0;
  const Mlp single({linear}, 0);
  Matrix row(1, 3);
  row << 1.0, 2.0, 0.25;
  const double logit = 0.5 - 2.0 + 0.5 - 0.2;
  CHECK(single.forward(row)(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-15));
  CHECK_THROWS_AS(single.forward(Matrix::Ones(1, 4)), ShapeError);
}

TEST_CASE("forward is bit-identical across runs and strictly inside (0,1)") {
  Rng rng(5);
  const Matrix x = random_matrix(rng, 50, 10);
  const Matrix a = Mlp::init(77, {10, 32, 1}).forward(x);
  const Matrix b = Mlp::init(77, {10, 32, 1}).forward(x);
  CHECK(a == b);
  CHECK(a.minCoeff() > 0.0);
  CHECK(a.maxCoeff() < 1.0);
}

TEST_CASE("encode then predict_from_latent equals forward exactly") {
  Rng rng(6);
  const Matrix x = random_matrix(rng, 25, 9);
  for (int split : {0, 1, 2}) {
    CAPTURE(split);
    const Mlp model = Mlp::init(3, {9, 20, 12, 1}, split);
    CHECK(model.predict_from_latent(model.encode(x)) == model.forward(x));
  }
  const Mlp at0 = Mlp::init(3, {9, 20, 1}, 0);
  CHECK(at0.encode(x) == x);
  const Mlp deflt = Mlp::init(3, {9, 200, 1});
  CHECK(deflt.split_index() == 1);
  CHECK(deflt.encode(x).cols() == 200);
}

TEST_CASE("bce_loss examples") {
  const std::vector<int> y = {1, 0};
  Matrix s(2, 1);
  s << 0.9, 0.2;
  // -(ln 0.9 + ln 0.8) / 2
  CHECK(bce_loss(s, y) == doctest::Approx(0.164252033486018).epsilon(1e-14));
  CHECK(bce_loss(Matrix::Constant(2, 1, 0.5), y) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  Matrix exact(2, 1);
  exact << 1.0, 0.0;
  CHECK(bce_loss(exact, y) == doctest::Approx(-std::log(1.0 - kBceClamp)).epsilon(1e-12));
  CHECK(bce_loss(exact, y) < 1e-6);
}

TEST_CASE("tape and plain BCE agree, and the tape gradient matches finite differences") {
  Matrix s(4, 1);
  s << 0.9, 0.2, 0.55, 0.01;
  const std::vector<int> y = {1, 0, 0, 1};
  Tape tape;
  Var sv = tape.parameter(s);
  Var loss = bce_loss(tape, sv, y);
  CHECK(tape.scalar(loss) == doctest::Approx(bce_loss(s, y)).epsilon(1e-15));
  tape.backward(loss);
  auto f = [&](const Matrix& p) { return bce_loss(p, y); };
  CHECK(finite_diff_check(f, s, tape.grad(sv), 1e-7) <= 1e-5);
}

TEST_CASE("sigmoid output bounds score differences by a quarter of logit differences") {
  Rng rng(9);
  const Mlp model = Mlp::init(4, {6, 16, 1});
  const Matrix x = random_matrix(rng, 200, 6, 2.0);
  const Matrix logits = model.logits(x), scores = model.forward(x);
  for (Eigen::Index i = 0; i + 1 < x.rows(); i += 2) {
    CHECK(std::abs(scores(i, 0) - scores(i + 1, 0)) <= 0.25 * std::abs(logits(i, 0) - logits(i + 1, 0)) + 1e-15);
  }
}

TEST_CASE("checkpoint JSON round-trips exactly") {
  const Mlp model = Mlp::init(8, {5, 7, 3, 1}, 1);
  const Mlp back = from_checkpoint_json(to_checkpoint_json(model));
  CHECK(back.layer_dims() == model.layer_dims());
  CHECK(back.split_index() == 1);
  CHECK(back.seed() == model.seed());
  for (std::size_t k = 0; k < model.parameters().size(); ++k) CHECK(*back.parameters()[k] == *model.parameters()[k]);
  CHECK_THROWS(from_checkpoint_json("{\"layer_dims\": [2, 1]}"));
  CHECK_THROWS(from_checkpoint_json("not json"));
}

TEST_CASE("identity output head gives the raw logit") {
  const Mlp model = Mlp::init(8, {3, 4, 1}, -1, OutputKind::kIdentity);
  Rng rng(1);
  const Matrix x = random_matrix(rng, 5, 3);
  CHECK(model.forward(x) == model.logits(x));
  CHECK(from_checkpoint_json(to_checkpoint_json(model)).output() == OutputKind::kIdentity);
}
