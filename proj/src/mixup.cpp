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

#include "fairpath/mixup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fairpath {
namespace {

struct Endpoints {
  Matrix e0;
  Matrix e1;
};

Endpoints endpoints(const Mlp& model, const PairedBatch& pair, MixSpace space) {
  pair.validate();
  if (space == MixSpace::kInput) {
    if (pair.x0.cols() != model.input_dim()) {
      throw ShapeError("mixup: batch has " + std::to_string(pair.x0.cols()) + " columns, model expects " +
                       std::to_string(model.input_dim()));
    }
    return {pair.x0, pair.x1};
  }
  return {model.encode(pair.x0), model.encode(pair.x1)};
}

Matrix mix(const Matrix& e0, const Matrix& e1, double t) { return e0 * (1.0 - t) + e1 * t; }

Matrix head(const Mlp& model, const Matrix& m, MixSpace space) {
  return space == MixSpace::kInput ? model.forward(m) : model.predict_from_latent(m);
}

Dual head(const Mlp& model, const Dual& m, MixSpace space) {
  return space == MixSpace::kInput ? model.forward(m) : model.predict_from_latent(m);
}

double weighted_mean(const PairedBatch& pair, const Matrix& column) {
  if (pair.uniform()) return column.mean();
  return column.cwiseProduct(Matrix(pair.weights)).sum();
}

Var weighted_mean(Tape& tape, const PairedBatch& pair, Var column) {
  if (pair.uniform()) return tape.mean(column);
  return tape.inner(column, tape.constant(Matrix(pair.weights)));
}

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("mixup: t=" + std::to_string(t) + " outside [0,1]");
}

void check_grid(std::span<const double> grid, std::size_t min_points) {
  if (grid.size() < min_points) {
    throw std::invalid_argument("mixup: t-grid needs at least " + std::to_string(min_points) + " points");
  }
  if (grid.front() != 0.0 || grid.back() != 1.0) throw std::invalid_argument("mixup: t-grid must run from 0 to 1");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("mixup: t-grid must be strictly ascending");
  }
}

std::vector<double> jvp_derivatives(const Mlp& model, const Endpoints& ends, const PairedBatch& pair,
                                    std::span<const double> grid, MixSpace space) {
  const Matrix direction = ends.e1 - ends.e0;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const Dual y = head(model, make_dual(mix(ends.e0, ends.e1, t), direction), space);
    out.push_back(weighted_mean(pair, y.tangent));
  }
  return out;
}

}  // namespace

std::string to_string(MixSpace space) { return space == MixSpace::kInput ? "input" : "latent"; }
std::string to_string(PenaltyForm form) { return form == PenaltyForm::kAbs ? "abs" : "squared"; }

MixSpace parse_mix_space(const std::string& text) {
  if (text == "input") return MixSpace::kInput;
  if (text == "latent") return MixSpace::kLatent;
  throw std::invalid_argument("unknown mixup space '" + text + "' (expected input|latent)");
}

PenaltyForm parse_penalty_form(const std::string& text) {
  if (text == "abs") return PenaltyForm::kAbs;
  if (text == "squared") return PenaltyForm::kSquared;
  throw std::invalid_argument("unknown penalty form '" + text + "' (expected abs|squared)");
}

void PairedBatch::validate() const {
  if (x0.rows() == 0) throw std::invalid_argument("PairedBatch: empty");
  if (x0.rows() != x1.rows() || x0.cols() != x1.cols()) {
    throw ShapeError("PairedBatch: blocks " + shape_string(x0) + " and " + shape_string(x1) + " do not pair");
  }
  if (!uniform() && weights.size() != x0.rows()) throw ShapeError("PairedBatch: one weight per pair required");
}

PairedBatch PairedBatch::couple(const Matrix& group0, const Matrix& group1, std::uint64_t seed) {
  if (group0.rows() == 0 || group1.rows() == 0) throw std::invalid_argument("PairedBatch::couple: empty group");
  if (group0.cols() != group1.cols()) throw ShapeError("PairedBatch::couple: column mismatch");
  const auto n0 = static_cast<std::int64_t>(group0.rows());
  const auto n1 = static_cast<std::int64_t>(group1.rows());

  Rng rng(derive_seed(seed, "couple"));
  std::vector<Eigen::Index> order0(static_cast<std::size_t>(n0)), order1(static_cast<std::size_t>(n1));
  std::iota(order0.begin(), order0.end(), Eigen::Index{0});
  std::iota(order1.begin(), order1.end(), Eigen::Index{0});
  std::shuffle(order0.begin(), order0.end(), rng);
  std::shuffle(order1.begin(), order1.end(), rng);

  // Row i of group 0 carries mass n1, row j of group 1 mass n0; total n0*n1.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::vector<std::int64_t> mass;
  std::int64_t left0 = n1, left1 = n0;
  std::size_t i = 0, j = 0;
  while (i < order0.size() && j < order1.size()) {
    const std::int64_t m = std::min(left0, left1);
    pairs.emplace_back(order0[i], order1[j]);
    mass.push_back(m);
    left0 -= m;
    left1 -= m;
    if (left0 == 0) {
      ++i;
      left0 = n1;
    }
    if (left1 == 0) {
      ++j;
      left1 = n0;
    }
  }

  PairedBatch out;
  const auto n = static_cast<Eigen::Index>(pairs.size());
  out.x0.resize(n, group0.cols());
  out.x1.resize(n, group1.cols());
  out.weights.resize(n);
  const double total = static_cast<double>(n0) * static_cast<double>(n1);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.x0.row(k) = group0.row(pairs[static_cast<std::size_t>(k)].first);
    out.x1.row(k) = group1.row(pairs[static_cast<std::size_t>(k)].second);
    out.weights(k) = static_cast<double>(mass[static_cast<std::size_t>(k)]) / total;
  }
  return out;
}

double pair_mean(const PairedBatch& pair, const Matrix& scores) { return weighted_mean(pair, scores); }

std::vector<double> uniform_grid(int points) {
  if (points < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / (points - 1);
  return grid;
}

double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size()) throw std::invalid_argument("trapezoid: length mismatch");
  double total = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) total += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return total;
}

Matrix mixup_interpolate(const PairedBatch& pair, double t, MixSpace space, const Mlp& model) {
  check_t(t);
  const Endpoints ends = endpoints(model, pair, space);
  return mix(ends.e0, ends.e1, t);
}

double mu_at(const Mlp& model, const PairedBatch& pair, double t, MixSpace space) {
  check_t(t);
  const Endpoints ends = endpoints(model, pair, space);
  return weighted_mean(pair, head(model, mix(ends.e0, ends.e1, t), space));
}

PathCurve mu_path(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space) {
  check_grid(t_grid, 2);
  const Endpoints ends = endpoints(model, pair, space);
  PathCurve curve;
  curve.t.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) curve.mu.push_back(weighted_mean(pair, head(model, mix(ends.e0, ends.e1, t), space)));
  for (double mu : curve.mu) curve.mu_calibrated.push_back(mu - curve.mu.front());
  return curve;
}

double path_derivative(const Mlp& model, const PairedBatch& pair, double t, DerivativeMode mode, double h,
                       MixSpace space) {
  check_t(t);
  const Endpoints ends = endpoints(model, pair, space);
  if (mode == DerivativeMode::kJvp) {
    const double grid[] = {t};
    return jvp_derivatives(model, ends, pair, grid, space).front();
  }
  if (!(h > 0.0) || t - h < 0.0 || t + h > 1.0) {
    throw std::domain_error("path_derivative: window [t-h, t+h] leaves [0,1]");
  }
  const double up = weighted_mean(pair, head(model, mix(ends.e0, ends.e1, t + h), space));
  const double down = weighted_mean(pair, head(model, mix(ends.e0, ends.e1, t - h), space));
  return (up - down) * (1.0 / (2.0 * h));
}

double arc_length(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space) {
  check_grid(t_grid, 3);
  const Endpoints ends = endpoints(model, pair, space);
  const std::vector<double> slope = jvp_derivatives(model, ends, pair, t_grid, space);
  std::vector<double> mu;
  mu.reserve(t_grid.size());
  for (double t : t_grid) mu.push_back(weighted_mean(pair, head(model, mix(ends.e0, ends.e1, t), space)));

  double total = 0.0;
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double trap = 0.5 * (t_grid[k] - t_grid[k - 1]) * (std::abs(slope[k]) + std::abs(slope[k - 1]));
    total += std::max(trap, std::abs(mu[k] - mu[k - 1]));
  }
  return total;
}

double path_integral(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space) {
  check_grid(t_grid, 3);
  const Endpoints ends = endpoints(model, pair, space);
  return trapezoid(t_grid, jvp_derivatives(model, ends, pair, t_grid, space));
}

Var fair_mixup_penalty(const BoundMlp& model, std::span<const PairedBatch> pairs, double t,
                       const PenaltyOptions& options) {
  if (pairs.empty()) throw std::invalid_argument("fair_mixup_penalty: no paired batches");
  const double h = options.h;
  if (!(h > 0.0) || t < h || t > 1.0 - h) {
    throw std::domain_error("fair_mixup_penalty: t=" + std::to_string(t) + " outside [h, 1-h] for h=" +
                            std::to_string(h));
  }
  Tape& tape = model.tape();
  Var total;
  for (const PairedBatch& pair : pairs) {
    pair.validate();
    Var up, down;
    if (options.space == MixSpace::kInput) {
      up = weighted_mean(tape, pair, model.forward(tape.constant(mix(pair.x0, pair.x1, t + h))));
      down = weighted_mean(tape, pair, model.forward(tape.constant(mix(pair.x0, pair.x1, t - h))));
    } else {
      const Var z0 = model.encode(tape.constant(pair.x0));
      const Var z1 = model.encode(tape.constant(pair.x1));
      auto mixed = [&](double s) { return tape.add(tape.scale(z0, 1.0 - s), tape.scale(z1, s)); };
      up = weighted_mean(tape, pair, model.predict_from_latent(mixed(t + h)));
      down = weighted_mean(tape, pair, model.predict_from_latent(mixed(t - h)));
    }
    const Var slope = tape.scale(tape.sub(up, down), 1.0 / (2.0 * h));
    const Var term = options.form == PenaltyForm::kAbs ? tape.abs(slope) : tape.square(slope);
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

Var gap_penalty(const BoundMlp& model, std::span<const PairedBatch> pairs) {
  if (pairs.empty()) throw std::invalid_argument("gap_penalty: no paired batches");
  Tape& tape = model.tape();
  Var total;
  for (const PairedBatch& pair : pairs) {
    pair.validate();
    const Var m0 = weighted_mean(tape, pair, model.forward(tape.constant(pair.x0)));
    const Var m1 = weighted_mean(tape, pair, model.forward(tape.constant(pair.x1)));
    const Var term = tape.abs(tape.sub(m0, m1));
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

double sample_mixing_t(Rng& rng, double h) {
  if (!(h > 0.0 && h < 0.5)) throw std::domain_error("sample_mixing_t: h must lie in (0, 0.5)");
  std::uniform_real_distribution<double> unif(h, 1.0 - h);
  return unif(rng);
}

}  // namespace fairpath
