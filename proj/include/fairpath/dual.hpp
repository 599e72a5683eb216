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

// Forward-mode (tangent) propagation over the same primitive set as the tape.
// A Dual carries a value and the directional derivative of that value along
// one fixed input direction; no tape is involved, so these are pure functions.

#pragma once

#include <cmath>

#include "fairpath/tensor.hpp"

namespace fairpath {

struct Dual {
  Matrix value;
  Matrix tangent;
};

inline Dual make_dual(const Matrix& value, const Matrix& tangent) {
  require_same_shape(value, tangent, "make_dual");
  return Dual{value, tangent};
}

/// x W + 1 b with constant W and b.
inline Dual affine(const Dual& x, const Matrix& weight, const Matrix& bias) {
  if (x.value.cols() != weight.rows() || bias.rows() != 1 || bias.cols() != weight.cols()) {
    throw ShapeError("affine(dual): x" + shape_string(x.value) + " W" + shape_string(weight));
  }
  Dual y{x.value * weight, x.tangent * weight};
  y.value.rowwise() += bias.row(0);
  return y;
}

inline Dual relu(const Dual& x) {
  Dual y{x.value.cwiseMax(0.0), x.tangent};
  for (Eigen::Index i = 0; i < x.value.size(); ++i) {
    if (!(x.value.data()[i] > 0.0)) y.tangent.data()[i] = 0.0;
  }
  return y;
}

inline Dual sigmoid(const Dual& x) {
  Dual y;
  y.value = x.value.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  y.tangent = x.tangent.cwiseProduct(y.value.cwiseProduct((1.0 - y.value.array()).matrix()));
  return y;
}

inline Dual add(const Dual& a, const Dual& b) {
  require_same_shape(a.value, b.value, "add(dual)");
  return Dual{a.value + b.value, a.tangent + b.tangent};
}

inline Dual scale(const Dual& x, double s) { return Dual{x.value * s, x.tangent * s}; }

/// Mean of all entries -> 1x1.
inline Dual mean(const Dual& x) {
  return Dual{Matrix::Constant(1, 1, x.value.mean()), Matrix::Constant(1, 1, x.tangent.mean())};
}

/// <c, x> for constant c -> 1x1.
inline Dual inner(const Matrix& c, const Dual& x) {
  require_same_shape(c, x.value, "inner(dual)");
  return Dual{Matrix::Constant(1, 1, c.cwiseProduct(x.value).sum()),
              Matrix::Constant(1, 1, c.cwiseProduct(x.tangent).sum())};
}

/// Exact directional derivative <grad f(point), direction> of a scalar-valued
/// function written against the Dual primitives.
template <class F>
double forward_jvp(F&& f, const Matrix& point, const Matrix& direction) {
  Dual out = f(make_dual(point, direction));
  if (out.value.size() != 1) throw ShapeError("forward_jvp: function must be scalar, got " + shape_string(out.value));
  return out.tangent(0, 0);
}

}  // namespace fairpath
