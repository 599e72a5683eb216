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

#include "fairpath/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace fairpath {

Matrix central_difference_gradient(const std::function<double(const Matrix&)>& f, const Matrix& point,
                                   double step) {
  if (!(step > 0.0)) throw std::invalid_argument("central_difference_gradient: step must be > 0");
  Matrix grad(point.rows(), point.cols());
  Matrix probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double x = point.data()[i];
    probe.data()[i] = x + step;
    const double up = f(probe);
    probe.data()[i] = x - step;
    const double down = f(probe);
    probe.data()[i] = x;
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor_ratio) {
  require_same_shape(analytic, numeric, "max_relative_error");
  const double scale = numeric.size() ? numeric.cwiseAbs().maxCoeff() : 0.0;
  const double floor = std::max(floor_ratio * scale, 1e-300);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

double finite_diff_check(const std::function<double(const Matrix&)>& f, const Matrix& point,
                         const Matrix& analytic, double step, double floor_ratio) {
  return max_relative_error(analytic, central_difference_gradient(f, point, step), floor_ratio);
}

}  // namespace fairpath
