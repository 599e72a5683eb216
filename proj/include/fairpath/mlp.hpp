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

// Binary classifiers of the form sigmoid(affine o relu o ... o affine).
//
// The layer stack is split at `split_index` into an encoder g (layers
// [0, split)) and a prediction head (layers [split, L) followed by the
// sigmoid), so that forward(x) == predict_from_latent(encode(x)) exactly.
// The same layer loop is evaluated by three backends: plain matrices, dual
// numbers (forward-mode tangents) and the gradient tape.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairpath/dual.hpp"
#include "fairpath/tape.hpp"
#include "fairpath/tensor.hpp"

namespace fairpath {

enum class Activation { kRelu, kIdentity };

/// Final squashing. Classifiers use the sigmoid; the identity head exists for
/// linear-in-features theory checks.
enum class OutputKind { kSigmoid, kIdentity };

struct Layer {
  Matrix weight;  // fan_in x fan_out
  Matrix bias;    // 1 x fan_out
  Activation activation = Activation::kRelu;
};

class Mlp {
 public:
  /// layer_dims = {input, hidden..., 1}. split_index < 0 selects the default
  /// split after the last hidden layer. Weights ~ N(0, 2 / fan_in), biases 0.
  static Mlp init(std::uint64_t seed, std::vector<int> layer_dims, int split_index = -1,
                  OutputKind output = OutputKind::kSigmoid);

  Mlp() = default;
  Mlp(std::vector<Layer> layers, int split_index, std::uint64_t seed = 0,
      OutputKind output = OutputKind::kSigmoid);

  int input_dim() const { return static_cast<int>(layers_.front().weight.rows()); }
  int latent_dim() const;
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int split_index() const { return split_index_; }
  std::uint64_t seed() const { return seed_; }
  OutputKind output() const { return output_; }
  std::vector<int> layer_dims() const;
  const std::vector<Layer>& layers() const { return layers_; }

  /// Pre-sigmoid outputs, n x 1.
  Matrix logits(const Matrix& x) const;
  /// Scores, n x 1: sigmoid(logits) for classifiers.
  Matrix forward(const Matrix& x) const;
  Matrix encode(const Matrix& x) const;
  Matrix predict_from_latent(const Matrix& z) const;

  Dual forward(const Dual& x) const;
  Dual encode(const Dual& x) const;
  Dual predict_from_latent(const Dual& z) const;

  /// Trainable tensors in the order W0, b0, W1, b1, ...
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::size_t parameter_count() const;

  /// Runs layers [begin, end) through a backend exposing
  /// affine(value, layer) and relu(value).
  template <class Backend>
  typename Backend::Value run(Backend& backend, typename Backend::Value x, int begin, int end) const {
    for (int l = begin; l < end; ++l) {
      x = backend.affine(x, l);
      if (layers_[l].activation == Activation::kRelu) x = backend.relu(x);
    }
    return x;
  }

 private:
  void validate() const;

  std::vector<Layer> layers_;
  int split_index_ = 0;
  std::uint64_t seed_ = 0;
  OutputKind output_ = OutputKind::kSigmoid;
};

/// Model parameters recorded on a tape for one step.
class BoundMlp {
 public:
  BoundMlp(Tape& tape, const Mlp& model);

  Var logits(Var x) const;
  Var forward(Var x) const;
  Var squash(Var logits) const;
  Var encode(Var x) const;
  Var predict_from_latent(Var z) const;

  std::span<const Var> params() const { return params_; }
  Tape& tape() const { return *tape_; }
  const Mlp& model() const { return *model_; }

 private:
  Tape* tape_;
  const Mlp* model_;
  std::vector<Var> params_;
};

/// Mean binary cross-entropy with scores clamped to [1e-7, 1 - 1e-7].
double bce_loss(const Matrix& scores, std::span<const int> labels);
Var bce_loss(Tape& tape, Var scores, std::span<const int> labels);

inline constexpr double kBceClamp = 1e-7;

/// Checkpoint document {layer_dims, split_index, weights, biases, seed}.
std::string to_checkpoint_json(const Mlp& model, int indent = 2);
Mlp from_checkpoint_json(const std::string& text);

}  // namespace fairpath
