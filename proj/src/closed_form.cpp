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

#include "fairpath/closed_form.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <json.hpp>

namespace fairpath {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr int kDivergenceRun = 10;

Vector mean_of(const Matrix& phi, std::span<const std::size_t> rows) {
  Vector sum = Vector::Zero(phi.cols());
  for (std::size_t r : rows) sum += phi.row(static_cast<Eigen::Index>(r)).transpose();
  return sum / static_cast<double>(rows.size());
}

void require_lambdas(double lambda1, double lambda2) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("lambda2 must be > 0");
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("lambda1 must be >= 0");
}

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ClosedFormInputs mean_embeddings(const Dataset& dataset, const FeatureMap& map) {
  if (dataset.dim() != map.input_dim()) {
    throw ShapeError("mean_embeddings: dataset has " + std::to_string(dataset.dim()) + " features, map expects " +
                     std::to_string(map.input_dim()));
  }
  std::vector<std::size_t> by_label[2], by_group[2];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_label[dataset.y[i] == 1].push_back(i);
    by_group[dataset.a[i] == 1].push_back(i);
  }
  for (int k = 0; k < 2; ++k) {
    if (by_label[k].empty()) throw DataError("mean_embeddings: no rows with label " + std::to_string(k));
    if (by_group[k].empty()) throw DataError("mean_embeddings: no rows in group " + std::to_string(k));
  }
  const Matrix phi = map.evaluate(dataset.x);
  ClosedFormInputs in;
  in.m_plus = mean_of(phi, by_label[1]);
  in.m_minus = mean_of(phi, by_label[0]);
  in.m0 = mean_of(phi, by_group[0]);
  in.m1 = mean_of(phi, by_group[1]);
  in.delta_pm = in.m_plus - in.m_minus;
  in.delta_01 = in.m0 - in.m1;
  return in;
}

Vector soft_project(const Vector& u, const Vector& x, double beta) {
  require_same_size(u, x, "soft_project");
  if (!(beta >= 0.0)) throw std::invalid_argument("soft_project: beta must be >= 0");
  const double denom = u.squaredNorm() + beta;
  if (denom == 0.0) throw std::invalid_argument("soft_project: u = 0 with beta = 0 is undefined");
  return u * (u.dot(x) / denom);
}

Vector prop2_solution(const Vector& delta_pm, const Vector& delta_01, double lambda1, double lambda2) {
  require_lambdas(lambda1, lambda2);
  require_same_size(delta_pm, delta_01, "prop2_solution");
  if (lambda1 == 0.0) return delta_pm / lambda2;
  return (delta_pm - soft_project(delta_01, delta_pm, lambda2 / lambda1)) / lambda2;
}

PairedBatch product_coupling(const Matrix& group0, const Matrix& group1) {
  if (group0.rows() == 0 || group1.rows() == 0) throw std::invalid_argument("product_coupling: empty group");
  if (group0.cols() != group1.cols()) throw ShapeError("product_coupling: feature dimensions differ");
  const Eigen::Index n0 = group0.rows(), n1 = group1.rows();
  PairedBatch pair;
  pair.x0.resize(n0 * n1, group0.cols());
  pair.x1.resize(n0 * n1, group0.cols());
  for (Eigen::Index i = 0; i < n0; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      pair.x0.row(i * n1 + j) = group0.row(i);
      pair.x1.row(i * n1 + j) = group1.row(j);
    }
  }
  return pair;
}

Matrix d_matrix(const PairedBatch& pairs, const FeatureMap& map, std::span<const double> t_grid,
                const DMatrixOptions& options) {
  pairs.validate();
  if (!map.differentiable()) {
    throw NotDifferentiable("d_matrix: feature map '" + map.describe() + "' is not differentiable");
  }
  if (pairs.x0.cols() != map.input_dim()) throw ShapeError("d_matrix: pair dimension does not match the map");
  if (t_grid.size() < 3) throw std::invalid_argument("d_matrix: grid needs at least 3 points");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (t_grid[k] < 0.0 || t_grid[k] > 1.0) throw std::invalid_argument("d_matrix: grid must lie in [0,1]");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("d_matrix: grid must ascend");
  }
  if (options.mode == DerivativeMode::kFiniteDifference && !(options.h > 0.0)) {
    throw std::invalid_argument("d_matrix: h must be > 0");
  }

  const Eigen::Index n = pairs.size();
  const int m = map.output_dim();
  const Matrix delta = pairs.x1 - pairs.x0;
  auto weight = [&](Eigen::Index i) { return pairs.uniform() ? 1.0 / static_cast<double>(n) : pairs.weights[i]; };

  // m'_t at each grid point, summed in pair order.
  std::vector<Vector> mdot(t_grid.size(), Vector::Zero(m));
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector x0 = pairs.x0.row(i).transpose();
      const Vector d = delta.row(i).transpose();
      Vector g;
      if (options.mode == DerivativeMode::kJvp) {
        g = map.directional(x0 + t * d, d);
      } else {
        const Vector up = map(x0 + (t + options.h) * d);
        const Vector down = map(x0 + (t - options.h) * d);
        g = (up - down) * (1.0 / (2.0 * options.h));
      }
      mdot[k] += weight(i) * g;
    }
  }

  Matrix d = Matrix::Zero(m, m);
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    const double w = 0.5 * (t_grid[k + 1] - t_grid[k]);
    d += w * (mdot[k] * mdot[k].transpose() + mdot[k + 1] * mdot[k + 1].transpose());
  }
  return 0.5 * (d + d.transpose());
}

Vector prop3_solution(const Vector& delta_pm, const Matrix& d, double lambda1, double lambda2) {
  require_lambdas(lambda1, lambda2);
  if (d.rows() != d.cols() || d.rows() != delta_pm.size()) {
    throw ShapeError("prop3_solution: D is " + shape_string(d) + " but delta_pm has size " +
                     std::to_string(delta_pm.size()));
  }
  const Eigen::Index m = d.rows();
  const Matrix a = lambda1 * d + lambda2 * Matrix::Identity(m, m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SolverError("prop3_solution: eigenvalue computation failed");
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw SolverError("prop3_solution: system is ill-conditioned (eigenvalues in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "])");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SolverError("prop3_solution: Cholesky factorization failed");
  return llt.solve(delta_pm);
}

std::string to_string(Objective objective) { return objective == Objective::kGapL2 ? "gap_l2" : "mixup_l2"; }

double objective_value(Objective objective, const ClosedFormInputs& in, const Vector& v, double lambda1,
                       double lambda2) {
  double penalty = 0.0;
  if (objective == Objective::kGapL2) {
    const double s = v.dot(in.delta_01);
    penalty = s * s;
  } else {
    penalty = v.dot(in.d * v);
  }
  return -v.dot(in.delta_pm) + 0.5 * lambda1 * penalty + 0.5 * lambda2 * v.squaredNorm();
}

Vector objective_gradient(Objective objective, const ClosedFormInputs& in, const Vector& v, double lambda1,
                          double lambda2) {
  Vector g = lambda2 * v - in.delta_pm;
  if (objective == Objective::kGapL2) {
    g += (lambda1 * v.dot(in.delta_01)) * in.delta_01;
  } else {
    g += lambda1 * (in.d * v);
  }
  return g;
}

GdResult gd_oracle(Objective objective, const ClosedFormInputs& in, double lambda1, double lambda2,
                   const GdOptions& options) {
  require_lambdas(lambda1, lambda2);
  const Eigen::Index m = in.delta_pm.size();
  if (objective == Objective::kGapL2) {
    require_same_size(in.delta_pm, in.delta_01, "gd_oracle");
  } else if (in.d.rows() != m || in.d.cols() != m) {
    throw ShapeError("gd_oracle: mixup_l2 needs an m x m D matrix");
  }

  GdResult result;
  result.learning_rate = options.learning_rate;
  if (result.learning_rate <= 0.0) {
    // Curvature bound: |d_01|^2 is exact for the rank-one term, the Frobenius
    // norm bounds the top eigenvalue of D.
    const double curvature = objective == Objective::kGapL2 ? in.delta_01.squaredNorm() : in.d.norm();
    result.learning_rate = 1.0 / (lambda1 * curvature + lambda2);
  }

  Vector v = Vector::Zero(m);
  double previous = objective_value(objective, in, v, lambda1, lambda2);
  int rising = 0;
  for (result.steps = 0;; ++result.steps) {
    const Vector g = objective_gradient(objective, in, v, lambda1, lambda2);
    result.grad_norm = g.norm();
    if (!std::isfinite(result.grad_norm)) throw SolverError("gd_oracle: non-finite gradient");
    if (result.grad_norm <= options.grad_tolerance) {
      result.converged = true;
      break;
    }
    if (result.steps >= options.max_steps) break;
    v -= result.learning_rate * g;
    const double value = objective_value(objective, in, v, lambda1, lambda2);
    rising = value > previous ? rising + 1 : 0;
    if (rising >= kDivergenceRun) {
      throw SolverError("gd_oracle: objective increased for " + std::to_string(kDivergenceRun) +
                        " consecutive steps (learning rate " + std::to_string(result.learning_rate) + ")");
    }
    previous = value;
  }
  result.v = std::move(v);
  return result;
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw ShapeError("min_eigenvalue: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double relative_l2_error(const Vector& a, const Vector& b) {
  require_same_size(a, b, "relative_l2_error");
  return (a - b).norm() / std::max(b.norm(), std::numeric_limits<double>::min());
}

std::string to_json(const ClosedFormInputs& in, int indent) {
  nlohmann::json doc = {
      {"m_plus", to_std(in.m_plus)}, {"m_minus", to_std(in.m_minus)},   {"m0", to_std(in.m0)},
      {"m1", to_std(in.m1)},         {"delta_pm", to_std(in.delta_pm)}, {"delta_01", to_std(in.delta_01)},
  };
  if (in.has_d()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < in.d.rows(); ++i) rows.push_back(to_std(in.d.row(i).transpose()));
    doc["d"] = std::move(rows);
  }
  return doc.dump(indent);
}

}  // namespace fairpath
