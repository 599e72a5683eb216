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

#pragma once

#include <functional>
#include <stdexcept>

#include "fairpath/tensor.hpp"

namespace fairpath {

/// Central-difference gradient of f at point, one coordinate at a time.
Matrix central_difference_gradient(const std::function<double(const Matrix&)>& f, const Matrix& point,
                                   double step);

/// Worst-coordinate relative discrepancy between `analytic` and the central
/// difference gradient. Coordinate i contributes
///   |a_i - n_i| / max(|a_i|, |n_i|, floor_ratio * max_j |n_j|, 1e-300),
/// so coordinates far below the gradient's scale are compared against that
/// scale rather than against their own (noise-dominated) magnitude.
double finite_diff_check(const std::function<double(const Matrix&)>& f, const Matrix& point,
                         const Matrix& analytic, double step, double floor_ratio = 1e-3);

/// Same measure between two already computed gradients.
double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor_ratio = 1e-3);

}  // namespace fairpath
