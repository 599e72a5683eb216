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

#include "fairpath/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairpath {

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAffine: return "affine";
    case Op::kRelu: return "relu";
    case Op::kSigmoid: return "sigmoid";
    case Op::kLogClamped: return "log_clamped";
    case Op::kAbs: return "abs";
    case Op::kSquare: return "square";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScaleShift: return "scale_shift";
    case Op::kMean: return "mean";
    case Op::kSum: return "sum";
    case Op::kInner: return "inner";
    case Op::kSliceRows: return "slice_rows";
    case Op::kConcatCols: return "concat_cols";
  }
  return "unknown";
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid Var handle");
  return nodes_[v.id];
}

Var Tape::push(Node n) {
  if (check_finite_ && !all_finite(n.value)) {
    throw NonFiniteValue(std::string("Tape: non-finite value produced by ") + op_name(n.op) +
                         " (node " + std::to_string(nodes_.size()) + ")");
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::affine(Var x, Var weight, Var bias) {
  const Matrix& xv = node(x).value;
  const Matrix& wv = node(weight).value;
  const Matrix& bv = node(bias).value;
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw ShapeError("affine: x" + shape_string(xv) + " W" + shape_string(wv) + " b" + shape_string(bv));
  }
  Node n;
  n.op = Op::kAffine;
  n.value = xv * wv;
  n.value.rowwise() += bv.row(0);
  n.a = x.id;
  n.b = weight.id;
  n.c = bias.id;
  n.requires_grad = node(x).requires_grad || node(weight).requires_grad || node(bias).requires_grad;
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::kRelu;
  n.value = node(x).value.cwiseMax(0.0);
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var x) {
  Node n;
  n.op = Op::kSigmoid;
  n.value = node(x).value.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::log_clamped(Var x, double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_clamped: need 0 < lo <= hi");
  Node n;
  n.op = Op::kLogClamped;
  n.value = node(x).value.unaryExpr([lo, hi](double z) { return std::log(std::clamp(z, lo, hi)); });
  n.a = x.id;
  n.p0 = lo;
  n.p1 = hi;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::abs(Var x) {
  Node n;
  n.op = Op::kAbs;
  n.value = node(x).value.cwiseAbs();
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::square(Var x) {
  Node n;
  n.op = Op::kSquare;
  n.value = node(x).value.cwiseAbs2();
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape(node(a).value, node(b).value, "add");
  Node n;
  n.op = Op::kAdd;
  n.value = node(a).value + node(b).value;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(node(a).value, node(b).value, "sub");
  Node n;
  n.op = Op::kSub;
  n.value = node(a).value - node(b).value;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(node(a).value, node(b).value, "mul");
  Node n;
  n.op = Op::kMul;
  n.value = node(a).value.cwiseProduct(node(b).value);
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::scale_shift(Var x, double scale, double shift) {
  Node n;
  n.op = Op::kScaleShift;
  n.value = (node(x).value * scale).array() + shift;
  n.a = x.id;
  n.p0 = scale;
  n.p1 = shift;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::mean(Var x) {
  const Matrix& xv = node(x).value;
  if (xv.size() == 0) throw ShapeError("mean: empty operand");
  Node n;
  n.op = Op::kMean;
  n.value = Matrix::Constant(1, 1, xv.mean());
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  Node n;
  n.op = Op::kSum;
  n.value = Matrix::Constant(1, 1, node(x).value.sum());
  n.a = x.id;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::inner(Var a, Var b) {
  require_same_shape(node(a).value, node(b).value, "inner");
  Node n;
  n.op = Op::kInner;
  n.value = Matrix::Constant(1, 1, node(a).value.cwiseProduct(node(b).value).sum());
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::slice_rows(Var x, Eigen::Index begin, Eigen::Index count) {
  const Matrix& xv = node(x).value;
  if (begin < 0 || count < 0 || begin + count > xv.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of " + shape_string(xv));
  }
  Node n;
  n.op = Op::kSliceRows;
  n.value = xv.middleRows(begin, count);
  n.a = x.id;
  n.i0 = begin;
  n.i1 = count;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows()) throw ShapeError("concat_cols: " + shape_string(av) + " vs " + shape_string(bv));
  Node n;
  n.op = Op::kConcatCols;
  n.value.resize(av.rows(), av.cols() + bv.cols());
  n.value << av, bv;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::elementwise(std::string_view name, Var x) {
  if (name == "relu") return relu(x);
  if (name == "sigmoid") return sigmoid(x);
  if (name == "abs") return abs(x);
  if (name == "square") return square(x);
  throw UnsupportedPrimitive("Tape: unsupported primitive '" + std::string(name) + "'");
}

double Tape::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1) throw ShapeError("scalar: value is " + shape_string(m));
  return m(0, 0);
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.adjoint.size() == 0) {
    n.adjoint = g;
  } else {
    n.adjoint += g;
  }
}

void Tape::backward(Var root) {
  const Matrix& rv = node(root).value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ShapeError("backward: root must be scalar, got " + shape_string(rv));
  }
  for (Node& n : nodes_) n.adjoint.resize(0, 0);
  nodes_[root.id].adjoint = Matrix::Ones(1, 1);

  for (std::size_t k = root.id + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (n.adjoint.size() == 0 || !n.requires_grad) continue;
    // Inputs always precede their consumer, so accumulate() never touches node k.
    const Matrix& dy = n.adjoint;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kAffine: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& w = nodes_[n.b].value;
        if (nodes_[n.a].requires_grad) accumulate(n.a, dy * w.transpose());
        if (nodes_[n.b].requires_grad) accumulate(n.b, x.transpose() * dy);
        if (nodes_[n.c].requires_grad) accumulate(n.c, dy.colwise().sum());
        break;
      }
      case Op::kRelu: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, dy.cwiseProduct(x.unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; })));
        break;
      }
      case Op::kSigmoid: {
        const Matrix& y = n.value;
        accumulate(n.a, dy.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
        break;
      }
      case Op::kLogClamped: {
        const Matrix& x = nodes_[n.a].value;
        const double lo = n.p0, hi = n.p1;
        accumulate(n.a, dy.cwiseProduct(x.unaryExpr([lo, hi](double z) {
          return (z >= lo && z <= hi) ? 1.0 / z : 0.0;
        })));
        break;
      }
      case Op::kAbs: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, dy.cwiseProduct(x.unaryExpr([](double z) {
          return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
        })));
        break;
      }
      case Op::kSquare:
        accumulate(n.a, dy.cwiseProduct(2.0 * nodes_[n.a].value));
        break;
      case Op::kAdd:
        accumulate(n.a, dy);
        accumulate(n.b, dy);
        break;
      case Op::kSub:
        accumulate(n.a, dy);
        accumulate(n.b, -dy);
        break;
      case Op::kMul:
        accumulate(n.a, dy.cwiseProduct(nodes_[n.b].value));
        accumulate(n.b, dy.cwiseProduct(nodes_[n.a].value));
        break;
      case Op::kScaleShift:
        accumulate(n.a, dy * n.p0);
        break;
      case Op::kMean: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), dy(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case Op::kSum: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), dy(0, 0)));
        break;
      }
      case Op::kInner:
        accumulate(n.a, dy(0, 0) * nodes_[n.b].value);
        accumulate(n.b, dy(0, 0) * nodes_[n.a].value);
        break;
      case Op::kSliceRows: {
        const Matrix& x = nodes_[n.a].value;
        Matrix g = Matrix::Zero(x.rows(), x.cols());
        g.middleRows(n.i0, n.i1) = dy;
        accumulate(n.a, g);
        break;
      }
      case Op::kConcatCols: {
        const Eigen::Index left = nodes_[n.a].value.cols();
        accumulate(n.a, dy.leftCols(left));
        accumulate(n.b, dy.rightCols(dy.cols() - left));
        break;
      }
      default:
        throw UnsupportedPrimitive(std::string("backward: no adjoint rule for ") + op_name(n.op));
    }
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.adjoint.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

std::vector<Matrix> reverse_grad(Tape& tape, Var root, std::span<const Var> params) {
  tape.backward(root);
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (Var p : params) out.push_back(tape.grad(p));
  return out;
}

}  // namespace fairpath
