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
#include "fairpath/metrics.hpp"
#include "fairpath/mixup.hpp"
#include "helpers.hpp"

using namespace fairpath;
using fairpath::testing::random_matrix;

namespace {

// f(x) = <v, x> + b with identity output.
Mlp linear_model(const Matrix& v_column, double b) {
  Layer layer{v_column, Matrix::Constant(1, 1, b), Activation::kIdentity};
  return Mlp({layer}, 0, 0, OutputKind::kIdentity);
}

Mlp constant_model(int d) {
  Mlp m = Mlp::init(1, {d, 6, 1});
  for (Matrix* p : m.parameters()) p->setZero();
  return m;
}

PairedBatch random_pair(Rng& rng, Eigen::Index n, Eigen::Index d) {
  PairedBatch p{random_matrix(rng, n, d), random_matrix(rng, n, d), {}};
  p.x1.col(0).array() += 1.0;
  return p;
}

Vector column_mean(const Matrix& m) { return m.colwise().mean().transpose(); }

}  // namespace

TEST_CASE("mixup_interpolate endpoints and midpoint") {
  PairedBatch pair{Matrix(1, 2), Matrix(1, 2), {}};
  pair.x0 << 1.0, 0.0;
  pair.x1 << 0.0, 1.0;
  const Mlp model = Mlp::init(0, {2, 3, 1});
  CHECK(mixup_interpolate(pair, 0.0, MixSpace::kInput, model) == pair.x0);
  CHECK(mixup_interpolate(pair, 1.0, MixSpace::kInput, model) == pair.x1);
  Matrix half(1, 2);
  half << 0.5, 0.5;
  CHECK(mixup_interpolate(pair, 0.5, MixSpace::kInput, model) == half);
  CHECK(mixup_interpolate(pair, 0.0, MixSpace::kLatent, model) == model.encode(pair.x0));
  CHECK_THROWS(mixup_interpolate(pair, 1.5, MixSpace::kInput, model));
  PairedBatch bad{Matrix::Ones(2, 2), Matrix::Ones(3, 2), {}};
  CHECK_THROWS_AS(mixup_interpolate(bad, 0.5, MixSpace::kInput, model), ShapeError);
}

TEST_CASE("mu_path examples") {
  Rng rng(1);
  const PairedBatch pair = random_pair(rng, 30, 4);
  const auto grid = uniform_grid(51);

  const PathCurve flat = mu_path(constant_model(4), pair, grid, MixSpace::kInput);
  CHECK(flat.t.size() == 51);
  for (double c : flat.mu_calibrated) CHECK(c == 0.0);

  // Affine in t: second differences vanish.
  const Mlp lin = linear_model(random_matrix(rng, 4, 1), 0.3);
  const PathCurve line = mu_path(lin, pair, grid, MixSpace::kInput);
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    CHECK(std::abs(line.mu[k + 1] - 2 * line.mu[k] + line.mu[k - 1]) <= 1e-13);
  }

  const Mlp mlp = Mlp::init(5, {4, 16, 1});
  const PathCurve curve = mu_path(mlp, pair, uniform_grid(201), MixSpace::kInput);
  const Matrix f0 = mlp.forward(pair.x0), f1 = mlp.forward(pair.x1);
  const double ddp = delta_dp(GroupedScores::from_groups({f0.data(), static_cast<std::size_t>(f0.size())},
                                                         {f1.data(), static_cast<std::size_t>(f1.size())}));
  CHECK(std::abs(std::abs(curve.mu_calibrated.back()) - ddp) <= 1e-15);
  CHECK_THROWS(mu_path(mlp, pair, std::vector<double>{0.0, 0.5}, MixSpace::kInput));
  CHECK_THROWS(mu_path(mlp, PairedBatch{}, grid, MixSpace::kInput));
}

TEST_CASE("path_derivative examples") {
  Rng rng(2);
  const PairedBatch pair = random_pair(rng, 25, 3);
  const Matrix v = random_matrix(rng, 3, 1);
  const Mlp lin = linear_model(v, -0.1);
  // With T(t) = (1 - t) x0 + t x1 the derivative is <v, mean(x1) - mean(x0)>.
  const double expected = v.col(0).dot(column_mean(pair.x1) - column_mean(pair.x0));
  for (double t : {0.2, 0.5, 0.7}) {
    CHECK(path_derivative(lin, pair, t, DerivativeMode::kJvp, 0, MixSpace::kInput) ==
          doctest::Approx(expected).epsilon(1e-13));
    CHECK(path_derivative(lin, pair, t, DerivativeMode::kFiniteDifference, 0.1, MixSpace::kInput) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  const Mlp flat = constant_model(3);
  CHECK(path_derivative(flat, pair, 0.4, DerivativeMode::kJvp, 0, MixSpace::kInput) == 0.0);
  CHECK(path_derivative(flat, pair, 0.4, DerivativeMode::kFiniteDifference, 1e-3, MixSpace::kInput) == 0.0);

  CHECK_THROWS_AS(path_derivative(lin, pair, 0.0005, DerivativeMode::kFiniteDifference, 1e-3, MixSpace::kInput),
                  std::domain_error);
  CHECK_THROWS_AS(path_derivative(lin, pair, 0.95, DerivativeMode::kFiniteDifference, 0.1, MixSpace::kInput),
                  std::domain_error);
}

TEST_CASE("fd and jvp path derivatives agree on random MLPs") {
  Rng rng(3);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const Mlp model = Mlp::init(50 + trial, {5, 24, 1});
    const PairedBatch pair = random_pair(rng, 40, 5);
    const double t = unif(rng);
    // The latent path of a one-hidden-layer net is smooth in t.
    const double latent = path_derivative(model, pair, t, DerivativeMode::kJvp, 0, MixSpace::kLatent);
    const double latent_fd = path_derivative(model, pair, t, DerivativeMode::kFiniteDifference, 1e-3, MixSpace::kLatent);
    CHECK(std::abs(latent_fd - latent) <= 1e-5 * (1.0 + std::abs(latent)));
    // The input path crosses ReLU kinks, so only a window too small to reach one recovers the jvp.
    const double input = path_derivative(model, pair, t, DerivativeMode::kJvp, 0, MixSpace::kInput);
    const double input_fd = path_derivative(model, pair, t, DerivativeMode::kFiniteDifference, 1e-7, MixSpace::kInput);
    CHECK(std::abs(input_fd - input) <= 1e-6 * (1.0 + std::abs(input)));
  }
}

TEST_CASE("arc_length examples") {
  Rng rng(4);
  const PairedBatch pair = random_pair(rng, 20, 3);
  const auto grid = uniform_grid(51);
  const Mlp lin = linear_model(random_matrix(rng, 3, 1), 0.0);
  const PathCurve line = mu_path(lin, pair, grid, MixSpace::kInput);
  CHECK(arc_length(lin, pair, grid, MixSpace::kInput) ==
        doctest::Approx(std::abs(line.mu.back() - line.mu.front())).epsilon(1e-12));
  CHECK(arc_length(constant_model(3), pair, grid, MixSpace::kInput) == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const Mlp model = Mlp::init(70 + trial, {3, 32, 1});
    for (MixSpace space : {MixSpace::kInput, MixSpace::kLatent}) {
      const PathCurve c = mu_path(model, pair, grid, space);
      CHECK(arc_length(model, pair, grid, space) >= std::abs(c.mu.back() - c.mu.front()) - 1e-9);
    }
  }
  CHECK_THROWS(arc_length(lin, pair, std::vector<double>{0.0, 1.0}, MixSpace::kInput));
  CHECK_THROWS(arc_length(lin, pair, std::vector<double>{0.0, 0.7, 0.5, 1.0}, MixSpace::kInput));
}

TEST_CASE("path integral recovers the endpoint difference") {
  Rng rng(5);
  const PairedBatch pair = random_pair(rng, 64, 6);
  const Mlp model = Mlp::init(8, {6, 64, 1});
  const PathCurve c = mu_path(model, pair, uniform_grid(2), MixSpace::kInput);
  CHECK(std::abs(path_integral(model, pair, uniform_grid(201), MixSpace::kInput) - (c.mu[1] - c.mu[0])) <= 1e-3);
}

TEST_CASE("fair_mixup_penalty examples") {
  Rng rng(6);
  const PairedBatch pair = random_pair(rng, 30, 4);
  const std::vector<PairedBatch> pairs{pair};

  {
    const Mlp flat = constant_model(4);
    Tape tape;
    BoundMlp bound(tape, flat);
    Var p = fair_mixup_penalty(bound, pairs, 0.5, {});
    CHECK(tape.scalar(p) == 0.0);
    for (const Matrix& g : reverse_grad(tape, p, bound.params())) CHECK(g.isZero());
  }
  {
    const Matrix v = random_matrix(rng, 4, 1);
    const Mlp lin = linear_model(v, 0.2);
    const double expected = std::abs(v.col(0).dot(column_mean(pair.x0) - column_mean(pair.x1)));
    for (double t : {0.1, 0.35, 0.9}) {
      Tape tape;
      BoundMlp bound(tape, lin);
      CHECK(tape.scalar(fair_mixup_penalty(bound, pairs, t, {})) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  for (MixSpace space : {MixSpace::kInput, MixSpace::kLatent}) {
    const Mlp model = Mlp::init(9, {4, 20, 1});
    const double t = 0.37, h = 0.1;
    Tape tape;
    BoundMlp bound(tape, model);
    const double value = tape.scalar(fair_mixup_penalty(bound, pairs, t, {space, h, PenaltyForm::kAbs}));
    CHECK(value == std::abs(path_derivative(model, pair, t, DerivativeMode::kFiniteDifference, h, space)));
    const double squared = tape.scalar(fair_mixup_penalty(bound, pairs, t, {space, h, PenaltyForm::kSquared}));
    CHECK(squared == doctest::Approx(value * value).epsilon(1e-14));
  }
}

TEST_CASE("fair_mixup_penalty rejects bad windows and empty input") {
  Rng rng(7);
  const std::vector<PairedBatch> pairs{random_pair(rng, 5, 2)};
  const Mlp model = Mlp::init(1, {2, 3, 1});
  Tape tape;
  BoundMlp bound(tape, model);
  CHECK_THROWS_AS(fair_mixup_penalty(bound, pairs, 0.05, {}), std::domain_error);
  CHECK_THROWS_AS(fair_mixup_penalty(bound, pairs, 0.95, {}), std::domain_error);
  CHECK_THROWS(fair_mixup_penalty(bound, std::vector<PairedBatch>{}, 0.5, {}));
  CHECK_THROWS(fair_mixup_penalty(bound, std::vector<PairedBatch>{PairedBatch{}}, 0.5, {}));
}

TEST_CASE("equalized-odds penalty sums the per-label terms") {
  Rng rng(8);
  const std::vector<PairedBatch> pairs{random_pair(rng, 12, 3), random_pair(rng, 9, 3)};
  const Mlp model = Mlp::init(2, {3, 10, 1});
  Tape tape;
  BoundMlp bound(tape, model);
  const double both = tape.scalar(fair_mixup_penalty(bound, pairs, 0.4, {}));
  const double first = tape.scalar(fair_mixup_penalty(bound, std::span(pairs).first(1), 0.4, {}));
  const double second = tape.scalar(fair_mixup_penalty(bound, std::span(pairs).last(1), 0.4, {}));
  CHECK(both == doctest::Approx(first + second).epsilon(1e-15));
}

TEST_CASE("penalty parameter gradients match finite differences") {
  Rng rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    const Mlp model = Mlp::init(200 + trial, {4, 12, 1});
    const std::vector<PairedBatch> pairs{random_pair(rng, 16, 4), random_pair(rng, 16, 4)};
    for (MixSpace space : {MixSpace::kInput, MixSpace::kLatent}) {
      const PenaltyOptions options{space, 0.1, trial % 2 ? PenaltyForm::kSquared : PenaltyForm::kAbs};
      Tape tape;
      BoundMlp bound(tape, model);
      const auto grads = reverse_grad(tape, fair_mixup_penalty(bound, pairs, 0.45, options), bound.params());
      const auto params = model.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto f = [&](const Matrix& p) {
          Mlp copy = model;
          *copy.parameters()[k] = p;
          Tape t2;
          BoundMlp b2(t2, copy);
          return t2.scalar(fair_mixup_penalty(b2, pairs, 0.45, options));
        };
        CHECK(finite_diff_check(f, *params[k], grads[k], 1e-6) <= 1e-4);
      }
    }
  }
}

TEST_CASE("swapping groups reverses the path and keeps the penalty") {
  Rng rng(10);
  const PairedBatch pair = random_pair(rng, 20, 3);
  const PairedBatch swapped{pair.x1, pair.x0, {}};
  const Mlp model = Mlp::init(4, {3, 16, 1});
  for (double t : {0.2, 0.5, 0.65}) {
    const double forward = path_derivative(model, pair, t, DerivativeMode::kJvp, 0, MixSpace::kInput);
    const double reverse = path_derivative(model, swapped, 1.0 - t, DerivativeMode::kJvp, 0, MixSpace::kInput);
    CHECK(reverse == doctest::Approx(-forward).epsilon(1e-12));
  }
  Tape tape;
  BoundMlp bound(tape, model);
  const double a = tape.scalar(fair_mixup_penalty(bound, std::vector<PairedBatch>{pair}, 0.5, {}));
  const double b = tape.scalar(fair_mixup_penalty(bound, std::vector<PairedBatch>{swapped}, 0.5, {}));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("gap_penalty examples") {
  Rng rng(11);
  const Matrix x = random_matrix(rng, 10, 3);
  const Mlp model = Mlp::init(3, {3, 8, 1});
  {
    Tape tape;
    BoundMlp bound(tape, model);
    CHECK(tape.scalar(gap_penalty(bound, std::vector<PairedBatch>{{x, x, {}}})) == 0.0);
  }
  {
    // f(x) = x0 with identity output: group means 0.8 and 0.5.
    Matrix v = Matrix::Zero(2, 1);
    v(0, 0) = 1.0;
    const Mlp pick = linear_model(v, 0.0);
    Matrix x0(2, 2), x1(2, 2);
    x0 << 0.7, 3.0, 0.9, -1.0;
    x1 << 0.5, 2.0, 0.5, 8.0;
    Tape tape;
    BoundMlp bound(tape, pick);
    CHECK(tape.scalar(gap_penalty(bound, std::vector<PairedBatch>{{x0, x1, {}}})) ==
          doctest::Approx(0.3).epsilon(1e-14));
  }
  {
    const PairedBatch pair = random_pair(rng, 15, 3);
    Tape tape;
    BoundMlp bound(tape, model);
    const Matrix f0 = model.forward(pair.x0), f1 = model.forward(pair.x1);
    const double ddp = delta_dp(GroupedScores::from_groups({f0.data(), 15}, {f1.data(), 15}));
    CHECK(tape.scalar(gap_penalty(bound, std::vector<PairedBatch>{pair})) == doctest::Approx(ddp).epsilon(1e-14));
  }
}

TEST_CASE("couple keeps both marginals uniform") {
  Rng rng(12);
  const Matrix g0 = random_matrix(rng, 7, 2), g1 = random_matrix(rng, 3, 2);
  const PairedBatch pair = PairedBatch::couple(g0, g1, 5);
  CHECK(pair.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pair.size() <= 7 + 3 - 1);
  const Mlp model = Mlp::init(6, {2, 5, 1});
  CHECK(pair_mean(pair, model.forward(pair.x0)) == doctest::Approx(model.forward(g0).mean()).epsilon(1e-14));
  CHECK(pair_mean(pair, model.forward(pair.x1)) == doctest::Approx(model.forward(g1).mean()).epsilon(1e-14));
  const PairedBatch again = PairedBatch::couple(g0, g1, 5);
  CHECK(again.x0 == pair.x0);
  CHECK(again.weights == pair.weights);
}

TEST_CASE("sample_mixing_t stays in [h, 1-h]") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double t = sample_mixing_t(rng, 0.1);
    CHECK(t >= 0.1);
    CHECK(t <= 0.9);
  }
  CHECK_THROWS(sample_mixing_t(rng, 0.0));
  CHECK_THROWS(sample_mixing_t(rng, 0.5));
}
