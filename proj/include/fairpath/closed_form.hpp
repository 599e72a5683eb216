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

// Exact minimizers of the L2-regularized linear-in-features objectives
//
//   gap_l2:   -<v, d_pm> + l1/2 <v, d_01>^2 + l2/2 |v|^2
//   mixup_l2: -<v, d_pm> + l1/2 v^T D v    + l2/2 |v|^2
//
// where d_pm = m_plus - m_minus, d_01 = m0 - m1 are differences of mean
// embeddings and D = int_0^1 m'_t m'_t^T dt for the mean embedding m_t of the
// mixed points. The gradient-descent solver is kept independent of the
// closed forms so it can certify them.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "fairpath/dataset.hpp"
#include "fairpath/feature_map.hpp"
#include "fairpath/mixup.hpp"
#include "fairpath/tensor.hpp"

namespace fairpath {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClosedFormInputs {
  Vector m_plus;
  Vector m_minus;
  Vector m0;
  Vector m1;
  Vector delta_pm;
  Vector delta_01;
  Matrix d;  // empty until assigned

  bool has_d() const { return d.size() > 0; }
};

/// Empirical means of Phi over y=1, y=0, a=0 and a=1. Throws DataError if a
/// label or group is missing.
ClosedFormInputs mean_embeddings(const Dataset& dataset, const FeatureMap& map);

/// u <u, x> / (|u|^2 + beta).
Vector soft_project(const Vector& u, const Vector& x, double beta);

/// Minimizer of gap_l2: (d_pm - soft_project(d_01, d_pm, l2 / l1)) / l2.
Vector prop2_solution(const Vector& delta_pm, const Vector& delta_01, double lambda1, double lambda2);

enum class Coupling { kPaired, kProduct };

/// All n0 * n1 pairs of the two groups with uniform weights.
PairedBatch product_coupling(const Matrix& group0, const Matrix& group1);

struct DMatrixOptions {
  DerivativeMode mode = DerivativeMode::kFiniteDifference;
  double h = 1e-4;
};

/// D by trapezoidal quadrature of m'_t m'_t^T over t_grid (ascending, at least
/// 3 points in [0, 1]). m'_t is the weighted mean over pairs of
/// J Phi(T_i(t)) (x1_i - x0_i), taken either by a central difference in t or
/// from the analytic Jacobian. The result is symmetrized.
Matrix d_matrix(const PairedBatch& pairs, const FeatureMap& map, std::span<const double> t_grid,
                const DMatrixOptions& options = {});

/// Solves (l1 D + l2 I) v = d_pm by Cholesky. Throws SolverError if the
/// system's condition number exceeds 1e12.
Vector prop3_solution(const Vector& delta_pm, const Matrix& d, double lambda1, double lambda2);

enum class Objective { kGapL2, kMixupL2 };
std::string to_string(Objective objective);

double objective_value(Objective objective, const ClosedFormInputs& in, const Vector& v, double lambda1,
                       double lambda2);
Vector objective_gradient(Objective objective, const ClosedFormInputs& in, const Vector& v, double lambda1,
                          double lambda2);

struct GdOptions {
  long max_steps = 1'000'000;
  /// <= 0 selects 1/L for a computed upper bound L on the curvature.
  double learning_rate = 0.0;
  double grad_tolerance = 1e-10;
};

struct GdResult {
  Vector v;
  long steps = 0;
  double grad_norm = 0.0;
  double learning_rate = 0.0;
  bool converged = false;
};

/// Full-batch gradient descent from v = 0. Throws SolverError if the
/// objective rises for 10 consecutive steps.
GdResult gd_oracle(Objective objective, const ClosedFormInputs& in, double lambda1, double lambda2,
                   const GdOptions& options = {});

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& symmetric);

/// |a - b| / max(|b|, tiny).
double relative_l2_error(const Vector& a, const Vector& b);

std::string to_json(const ClosedFormInputs& in, int indent = 2);

}  // namespace fairpath
