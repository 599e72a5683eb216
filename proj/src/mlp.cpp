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

#include "fairpath/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "fairpath/rng.hpp"

namespace fairpath {
namespace {

struct PlainBackend {
  using Value = Matrix;
  const std::vector<Layer>& layers;
  Matrix affine(const Matrix& x, int l) const {
    if (x.cols() != layers[l].weight.rows()) {
      throw ShapeError("Mlp: input " + shape_string(x) + " does not match layer " + std::to_string(l) +
                       " weight " + shape_string(layers[l].weight));
    }
    Matrix y = x * layers[l].weight;
    y.rowwise() += layers[l].bias.row(0);
    return y;
  }
  Matrix relu(const Matrix& x) const { return x.cwiseMax(0.0); }
};

struct DualBackend {
  using Value = Dual;
  const std::vector<Layer>& layers;
  Dual affine(const Dual& x, int l) const { return fairpath::affine(x, layers[l].weight, layers[l].bias); }
  Dual relu(const Dual& x) const { return fairpath::relu(x); }
};

struct TapeBackend {
  using Value = Var;
  Tape& tape;
  std::span<const Var> params;
  Var affine(Var x, int l) const { return tape.affine(x, params[2 * l], params[2 * l + 1]); }
  Var relu(Var x) const { return tape.relu(x); }
};

Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

Mlp Mlp::init(std::uint64_t seed, std::vector<int> layer_dims, int split_index, OutputKind output) {
  if (layer_dims.size() < 2) throw std::invalid_argument("Mlp::init: need at least input and output dims");
  if (layer_dims.back() != 1) throw std::invalid_argument("Mlp::init: last layer dim must be 1");
  for (int d : layer_dims) {
    if (d <= 0) throw std::invalid_argument("Mlp::init: layer dims must be positive");
  }
  const int num_layers = static_cast<int>(layer_dims.size()) - 1;
  if (split_index < 0) split_index = num_layers - 1;

  Rng rng(derive_seed(seed, "mlp-init"));
  std::vector<Layer> layers;
  layers.reserve(num_layers);
  for (int l = 0; l < num_layers; ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    Layer layer;
    layer.weight.resize(fan_in, fan_out);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = normal(rng);
    layer.bias = Matrix::Zero(1, fan_out);
    layer.activation = (l + 1 == num_layers) ? Activation::kIdentity : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers), split_index, seed, output);
}

Mlp::Mlp(std::vector<Layer> layers, int split_index, std::uint64_t seed, OutputKind output)
    : layers_(std::move(layers)), split_index_(split_index), seed_(seed), output_(output) {
  validate();
}

void Mlp::validate() const {
  if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
      throw ShapeError("Mlp: bias of layer " + std::to_string(l) + " has shape " + shape_string(layer.bias));
    }
    if (l > 0 && layers_[l - 1].weight.cols() != layer.weight.rows()) {
      throw ShapeError("Mlp: layer " + std::to_string(l) + " does not chain with its predecessor");
    }
  }
  if (layers_.back().weight.cols() != 1) throw ShapeError("Mlp: output dimension must be 1");
  if (split_index_ < 0 || split_index_ >= num_layers()) {
    throw std::invalid_argument("Mlp: split_index " + std::to_string(split_index_) + " outside [0, " +
                                std::to_string(num_layers()) + ")");
  }
}

int Mlp::latent_dim() const {
  return split_index_ == 0 ? input_dim() : static_cast<int>(layers_[split_index_ - 1].weight.cols());
}

std::vector<int> Mlp::layer_dims() const {
  std::vector<int> dims{input_dim()};
  for (const Layer& layer : layers_) dims.push_back(static_cast<int>(layer.weight.cols()));
  return dims;
}

Matrix Mlp::logits(const Matrix& x) const {
  PlainBackend be{layers_};
  return run(be, x, 0, num_layers());
}

Matrix Mlp::forward(const Matrix& x) const {
  return output_ == OutputKind::kSigmoid ? sigmoid(logits(x)) : logits(x);
}

Matrix Mlp::encode(const Matrix& x) const {
  if (x.cols() != input_dim()) throw ShapeError("Mlp::encode: input " + shape_string(x));
  PlainBackend be{layers_};
  return run(be, x, 0, split_index_);
}

Matrix Mlp::predict_from_latent(const Matrix& z) const {
  if (z.cols() != latent_dim()) throw ShapeError("Mlp::predict_from_latent: latent " + shape_string(z));
  PlainBackend be{layers_};
  Matrix out = run(be, z, split_index_, num_layers());
  return output_ == OutputKind::kSigmoid ? sigmoid(out) : out;
}

Dual Mlp::forward(const Dual& x) const {
  DualBackend be{layers_};
  Dual out = run(be, x, 0, num_layers());
  return output_ == OutputKind::kSigmoid ? fairpath::sigmoid(out) : out;
}

Dual Mlp::encode(const Dual& x) const {
  if (x.value.cols() != input_dim()) throw ShapeError("Mlp::encode: input " + shape_string(x.value));
  DualBackend be{layers_};
  return run(be, x, 0, split_index_);
}

Dual Mlp::predict_from_latent(const Dual& z) const {
  if (z.value.cols() != latent_dim()) throw ShapeError("Mlp::predict_from_latent: latent " + shape_string(z.value));
  DualBackend be{layers_};
  Dual out = run(be, z, split_index_, num_layers());
  return output_ == OutputKind::kSigmoid ? fairpath::sigmoid(out) : out;
}

std::vector<Matrix*> Mlp::parameters() {
  std::vector<Matrix*> out;
  for (Layer& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Matrix*> Mlp::parameters() const {
  std::vector<const Matrix*> out;
  for (const Layer& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

BoundMlp::BoundMlp(Tape& tape, const Mlp& model) : tape_(&tape), model_(&model) {
  for (const Matrix* p : model.parameters()) params_.push_back(tape.parameter(*p));
}

Var BoundMlp::logits(Var x) const {
  TapeBackend be{*tape_, params_};
  return model_->run(be, x, 0, model_->num_layers());
}

Var BoundMlp::squash(Var logits) const {
  return model_->output() == OutputKind::kSigmoid ? tape_->sigmoid(logits) : logits;
}

Var BoundMlp::forward(Var x) const { return squash(logits(x)); }

Var BoundMlp::encode(Var x) const {
  TapeBackend be{*tape_, params_};
  return model_->run(be, x, 0, model_->split_index());
}

Var BoundMlp::predict_from_latent(Var z) const {
  TapeBackend be{*tape_, params_};
  return squash(model_->run(be, z, model_->split_index(), model_->num_layers()));
}

double bce_loss(const Matrix& scores, std::span<const int> labels) {
  if (scores.cols() != 1 || static_cast<std::size_t>(scores.rows()) != labels.size()) {
    throw ShapeError("bce_loss: scores " + shape_string(scores) + " vs " + std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ShapeError("bce_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(scores(static_cast<Eigen::Index>(i), 0), kBceClamp, 1.0 - kBceClamp);
    total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(labels.size());
}

Var bce_loss(Tape& tape, Var scores, std::span<const int> labels) {
  const Matrix& s = tape.value(scores);
  if (s.cols() != 1 || static_cast<std::size_t>(s.rows()) != labels.size()) {
    throw ShapeError("bce_loss: scores " + shape_string(s) + " vs " + std::to_string(labels.size()) + " labels");
  }
  Matrix y(s.rows(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = labels[i] ? 1.0 : 0.0;
  Matrix not_y = (1.0 - y.array()).matrix();
  Var log_p = tape.log_clamped(scores, kBceClamp, 1.0 - kBceClamp);
  Var log_q = tape.log_clamped(tape.scale_shift(scores, -1.0, 1.0), kBceClamp, 1.0 - kBceClamp);
  Var ll = tape.add(tape.mul(tape.constant(std::move(y)), log_p), tape.mul(tape.constant(std::move(not_y)), log_q));
  return tape.scale(tape.mean(ll), -1.0);
}

std::string to_checkpoint_json(const Mlp& model, int indent) {
  nlohmann::json doc;
  doc["layer_dims"] = model.layer_dims();
  doc["split_index"] = model.split_index();
  doc["seed"] = model.seed();
  doc["output"] = model.output() == OutputKind::kSigmoid ? "sigmoid" : "identity";
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const Layer& layer : model.layers()) {
    weights.push_back(std::vector<double>(layer.weight.data(), layer.weight.data() + layer.weight.size()));
    biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc.dump(indent);
}

Mlp from_checkpoint_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const auto dims = doc.at("layer_dims").get<std::vector<int>>();
  const auto& weights = doc.at("weights");
  const auto& biases = doc.at("biases");
  if (dims.size() < 2 || weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
    throw std::invalid_argument("checkpoint: layer_dims/weights/biases are inconsistent");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto w = weights[l].get<std::vector<double>>();
    const auto b = biases[l].get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(dims[l]) * dims[l + 1] || b.size() != static_cast<std::size_t>(dims[l + 1])) {
      throw std::invalid_argument("checkpoint: layer " + std::to_string(l) + " has the wrong number of values");
    }
    Layer layer;
    layer.weight = Eigen::Map<const Matrix>(w.data(), dims[l], dims[l + 1]);
    layer.bias = Eigen::Map<const Matrix>(b.data(), 1, dims[l + 1]);
    layer.activation = (l + 2 == dims.size()) ? Activation::kIdentity : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  const std::string output = doc.value("output", std::string("sigmoid"));
  if (output != "sigmoid" && output != "identity") throw std::invalid_argument("checkpoint: unknown output '" + output + "'");
  return Mlp(std::move(layers), doc.at("split_index").get<int>(), doc.value("seed", std::uint64_t{0}),
             output == "sigmoid" ? OutputKind::kSigmoid : OutputKind::kIdentity);
}

}  // namespace fairpath
