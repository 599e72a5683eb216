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

// Reverse-mode gradient tape over a closed set of matrix primitives.
//
// Every value recorded on the tape is a dense matrix. Operations append a
// node; backward() replays the nodes in reverse creation order, which is a
// valid topological order because a node can only reference earlier nodes.
// A Tape is single-owner and is meant to be cleared (or discarded) after each
// optimization step.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fairpath/tensor.hpp"

namespace fairpath {

class UnsupportedPrimitive : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteValue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
  bool valid() const { return id != static_cast<std::size_t>(-1); }
};

enum class Op {
  kLeaf,
  kAffine,      // x W + 1 b
  kRelu,
  kSigmoid,
  kLogClamped,  // log(clamp(x, lo, hi)), gradient zero where clamped
  kAbs,         // subgradient 0 at 0
  kSquare,
  kAdd,
  kSub,
  kMul,         // elementwise
  kScaleShift,  // a x + c
  kMean,        // mean of all entries -> 1x1
  kSum,         // sum of all entries -> 1x1
  kInner,       // sum of elementwise product -> 1x1
  kSliceRows,
  kConcatCols,
};

const char* op_name(Op op);

class Tape {
 public:
  /// With check_finite, every recorded value is tested and a NonFiniteValue
  /// is thrown at the first NaN/Inf. Enabled by default in debug builds.
#ifdef NDEBUG
  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}
#else
  explicit Tape(bool check_finite = true) : check_finite_(check_finite) {}
#endif

  /// A trainable leaf; receives a gradient.
  Var parameter(Matrix value);
  /// A constant leaf; never receives a gradient.
  Var constant(Matrix value);
  /// A leaf whose gradient is wanted without being a model parameter (e.g. an input).
  Var input(Matrix value) { return parameter(std::move(value)); }

  Var affine(Var x, Var weight, Var bias);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var log_clamped(Var x, double lo, double hi);
  Var abs(Var x);
  Var square(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale_shift(Var x, double scale, double shift);
  Var scale(Var x, double s) { return scale_shift(x, s, 0.0); }
  Var mean(Var x);
  Var sum(Var x);
  Var inner(Var a, Var b);
  Var slice_rows(Var x, Eigen::Index begin, Eigen::Index count);
  Var concat_cols(Var a, Var b);

  /// Elementwise primitive by name; throws UnsupportedPrimitive for names
  /// outside {relu, sigmoid, abs, square}.
  Var elementwise(std::string_view name, Var x);

  const Matrix& value(Var v) const { return node(v).value; }
  double scalar(Var v) const;

  /// Propagates adjoints from a 1x1 root. Gradients of earlier backward calls
  /// are discarded.
  void backward(Var root);

  /// Gradient of the last backward root with respect to v; zeros if v did not
  /// influence the root.
  Matrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    Matrix value;
    Matrix adjoint;  // empty until touched during backward
    std::size_t a = 0, b = 0, c = 0;
    double p0 = 0.0, p1 = 0.0;
    Eigen::Index i0 = 0, i1 = 0;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Var push(Node n);
  void accumulate(std::size_t id, const Matrix& g);

  std::vector<Node> nodes_;
  bool check_finite_;
};

/// Gradients of a scalar root with respect to every parameter in `params`,
/// in the same order.
std::vector<Matrix> reverse_grad(Tape& tape, Var root, std::span<const Var> params);

}  // namespace fairpath
