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

#include "fairpath/feature_map.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fairpath/rng.hpp"

namespace fairpath {
namespace {

// Multisets of size `degree` over [first, d), appended as exponent vectors.
void enumerate(int d, int first, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (int i = first; i < d; ++i) {
    ++current[i];
    enumerate(d, i, remaining - 1, current, out);
    --current[i];
  }
}

double monomial(const std::vector<int>& e, const Vector& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (int k = 0; k < e[i]; ++k) v *= x[static_cast<Eigen::Index>(i)];
  }
  return v;
}

double monomial_partial(const std::vector<int>& e, const Vector& x, std::size_t j) {
  if (e[j] == 0) return 0.0;
  double v = static_cast<double>(e[j]);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const int power = i == j ? e[i] - 1 : e[i];
    for (int k = 0; k < power; ++k) v *= x[static_cast<Eigen::Index>(i)];
  }
  return v;
}

void require_dim(int d) {
  if (d < 1) throw std::invalid_argument("FeatureMap: input_dim must be >= 1");
}

}  // namespace

FeatureMap FeatureMap::identity(int input_dim) {
  require_dim(input_dim);
  FeatureMap map;
  map.kind_ = Kind::kIdentity;
  map.input_dim_ = map.output_dim_ = input_dim;
  return map;
}

FeatureMap FeatureMap::polynomial(int input_dim, int degree) {
  require_dim(input_dim);
  if (degree < 1) throw std::invalid_argument("FeatureMap::polynomial: degree must be >= 1");
  FeatureMap map;
  map.kind_ = Kind::kPolynomial;
  map.input_dim_ = input_dim;
  map.degree_ = degree;
  std::vector<int> current(static_cast<std::size_t>(input_dim), 0);
  for (int k = 1; k <= degree; ++k) enumerate(input_dim, 0, k, current, map.monomials_);
  map.output_dim_ = static_cast<int>(map.monomials_.size());
  return map;
}

FeatureMap FeatureMap::random_fourier(int input_dim, int count, double bandwidth, std::uint64_t seed) {
  require_dim(input_dim);
  if (count < 1) throw std::invalid_argument("FeatureMap::random_fourier: count must be >= 1");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("FeatureMap::random_fourier: bandwidth must be > 0");
  FeatureMap map;
  map.kind_ = Kind::kRandomFourier;
  map.input_dim_ = input_dim;
  map.output_dim_ = count;
  map.bandwidth_ = bandwidth;
  map.seed_ = seed;
  Rng rng(derive_seed(seed, "random-fourier"));
  std::normal_distribution<double> normal(0.0, 1.0 / bandwidth);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  map.omega_.resize(count, input_dim);
  for (Eigen::Index i = 0; i < map.omega_.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.omega_.cols(); ++j) map.omega_(i, j) = normal(rng);
  }
  map.phase_.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) map.phase_[i] = phase(rng);
  return map;
}

FeatureMap FeatureMap::custom(int input_dim, int output_dim, std::function<Vector(const Vector&)> fn,
                              std::string name) {
  require_dim(input_dim);
  if (output_dim < 1) throw std::invalid_argument("FeatureMap::custom: output_dim must be >= 1");
  if (!fn) throw std::invalid_argument("FeatureMap::custom: empty function");
  FeatureMap map;
  map.kind_ = Kind::kCustom;
  map.input_dim_ = input_dim;
  map.output_dim_ = output_dim;
  map.custom_ = std::move(fn);
  map.name_ = std::move(name);
  return map;
}

std::string FeatureMap::describe() const {
  switch (kind_) {
    case Kind::kIdentity:
      return "identity";
    case Kind::kPolynomial:
      return "polynomial(degree=" + std::to_string(degree_) + ")";
    case Kind::kRandomFourier:
      return "random_fourier(count=" + std::to_string(output_dim_) + ", bandwidth=" + std::to_string(bandwidth_) +
             ", seed=" + std::to_string(seed_) + ")";
    case Kind::kCustom:
      return name_;
  }
  return "unknown";
}

Vector FeatureMap::operator()(const Vector& x) const {
  if (x.size() != input_dim_) {
    throw ShapeError("FeatureMap: expected input of size " + std::to_string(input_dim_) + ", got " +
                     std::to_string(x.size()));
  }
  switch (kind_) {
    case Kind::kIdentity:
      return x;
    case Kind::kPolynomial: {
      Vector out(output_dim_);
      for (int k = 0; k < output_dim_; ++k) out[k] = monomial(monomials_[static_cast<std::size_t>(k)], x);
      return out;
    }
    case Kind::kRandomFourier: {
      const double scale = std::sqrt(2.0 / output_dim_);
      Vector arg = omega_ * x + phase_;
      return scale * arg.array().cos().matrix();
    }
    case Kind::kCustom: {
      Vector out = custom_(x);
      if (out.size() != output_dim_) throw ShapeError("FeatureMap: custom map returned the wrong size");
      return out;
    }
  }
  throw std::logic_error("FeatureMap: unknown kind");
}

Matrix FeatureMap::evaluate(const Matrix& x) const {
  Matrix out(x.rows(), output_dim_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = (*this)(x.row(i).transpose()).transpose();
  return out;
}

Matrix FeatureMap::jacobian(const Vector& x) const {
  if (x.size() != input_dim_) throw ShapeError("FeatureMap::jacobian: input size mismatch");
  switch (kind_) {
    case Kind::kIdentity:
      return Matrix::Identity(input_dim_, input_dim_);
    case Kind::kPolynomial: {
      Matrix j(output_dim_, input_dim_);
      for (int k = 0; k < output_dim_; ++k) {
        for (int i = 0; i < input_dim_; ++i) {
          j(k, i) = monomial_partial(monomials_[static_cast<std::size_t>(k)], x, static_cast<std::size_t>(i));
        }
      }
      return j;
    }
    case Kind::kRandomFourier: {
      const double scale = std::sqrt(2.0 / output_dim_);
      Vector s = -(omega_ * x + phase_).array().sin().matrix() * scale;
      return s.asDiagonal() * omega_;
    }
    case Kind::kCustom:
      throw NotDifferentiable("FeatureMap '" + name_ + "' has no Jacobian");
  }
  throw std::logic_error("FeatureMap: unknown kind");
}

Vector FeatureMap::directional(const Vector& x, const Vector& direction) const {
  if (direction.size() != input_dim_) throw ShapeError("FeatureMap::directional: direction size mismatch");
  if (kind_ == Kind::kIdentity) return direction;
  return jacobian(x) * direction;
}

}  // namespace fairpath
