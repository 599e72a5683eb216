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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairpath/tensor.hpp"

namespace fairpath {

class NotDifferentiable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fixed feature map Phi : R^d -> R^m for models f(x) = <v, Phi(x)>.
class FeatureMap {
 public:
  enum class Kind { kIdentity, kPolynomial, kRandomFourier, kCustom };

  static FeatureMap identity(int input_dim);
  /// All monomials of total degree 1..degree (no constant term), ordered by
  /// degree and then lexicographically by variable index.
  static FeatureMap polynomial(int input_dim, int degree);
  /// sqrt(2/count) * cos(omega^T x + b), omega ~ N(0, I / bandwidth^2),
  /// b ~ U[0, 2 pi).
  static FeatureMap random_fourier(int input_dim, int count, double bandwidth, std::uint64_t seed);
  /// Opaque map with no Jacobian; rejected wherever derivatives are needed.
  static FeatureMap custom(int input_dim, int output_dim, std::function<Vector(const Vector&)> fn,
                           std::string name = "custom");

  Kind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  bool differentiable() const { return kind_ != Kind::kCustom; }
  std::string describe() const;

  Vector operator()(const Vector& x) const;
  /// Row-wise evaluation, n x m.
  Matrix evaluate(const Matrix& x) const;
  /// m x d Jacobian at x.
  Matrix jacobian(const Vector& x) const;
  /// J Phi(x) * direction, without materializing the Jacobian.
  Vector directional(const Vector& x, const Vector& direction) const;

  /// Exponent vectors of the polynomial monomials (empty for other kinds).
  const std::vector<std::vector<int>>& monomials() const { return monomials_; }

 private:
  Kind kind_ = Kind::kIdentity;
  int input_dim_ = 0;
  int output_dim_ = 0;
  int degree_ = 0;
  double bandwidth_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<int>> monomials_;
  Matrix omega_;  // m x d
  Vector phase_;
  std::function<Vector(const Vector&)> custom_;
  std::string name_;
};

}  // namespace fairpath
