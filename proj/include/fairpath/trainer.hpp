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

// Penalized training: BCE + lambda * penalty with Adam, per-epoch validation
// and constrained model selection, plus the lambda x seed sweep.

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairpath/dataset.hpp"
#include "fairpath/mixup.hpp"
#include "fairpath/mlp.hpp"

namespace fairpath {

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kErm, kGapReg, kFairMixup, kAdvDebias };
std::string to_string(Method method);
Method parse_method(const std::string& text);

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Updates params[i] -= lr * mhat / (sqrt(vhat) + eps) using grads[i].
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct TrainConfig {
  Method method = Method::kErm;
  Constraint constraint = Constraint::kDp;
  MixSpace space = MixSpace::kInput;  // fair_mixup only
  double lambda = 0.0;
  PenaltyForm penalty_form = PenaltyForm::kAbs;
  double h = 0.1;
  int epochs = 50;
  int batch_size = 1000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::vector<int> hidden_dims = {200};
  SplitSpec split;
  /// Selection keeps epochs with validation AP >= best - ap_slack.
  double selection_ap_slack = 0.01;
  int adversary_hidden = 32;

  void validate() const;
  /// Full layer dims for a dataset with `input_dim` features.
  std::vector<int> layer_dims(int input_dim) const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& doc);
  /// 16 hex digits hashing the canonical JSON of the fields that affect
  /// training (lambda is normalized to 0 for ERM).
  std::string fingerprint() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_objective = 0.0;  // mean over batches of BCE + lambda * penalty
  double train_penalty = 0.0;
  double val_ap = 0.0;
  double val_ddp = 0.0;
  double val_deo = 0.0;
};

struct TradeoffRecord {
  std::string fingerprint;
  Method method = Method::kErm;
  Constraint constraint = Constraint::kDp;
  MixSpace space = MixSpace::kInput;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int epoch_selected = -1;
  double train_ap = 0.0, test_ap = 0.0;
  double train_ddp = 0.0, test_ddp = 0.0;
  double train_deo = 0.0, test_deo = 0.0;
  double test_mean_thresh_dp = 0.0, test_mean_thresh_eo = 0.0;
  bool failed = false;
  std::string error;

  nlohmann::json to_json() const;
};

struct TrainResult {
  Mlp model;
  TradeoffRecord record;
  std::vector<EpochMetrics> history;
};

/// Gap of the active constraint: delta_dp or delta_eo.
double constraint_gap(const EpochMetrics& m, Constraint constraint);

/// Index of the epoch with the smallest validation gap among epochs whose
/// AP is within ap_slack of the best; ties keep the earliest epoch. Falls
/// back to the best-AP epoch if none qualifies.
int select_model(std::span<const EpochMetrics> history, Constraint constraint, double ap_slack = 0.01);

/// The train/val/test split used by train() for this config.
Splits split_for(const TrainConfig& config, const Dataset& dataset);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Trains on split_for(config, dataset). Throws TrainingAborted on a
/// non-finite loss, naming epoch, batch and lambda.
TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch = {});

/// Record of a model evaluated on the splits (epoch_selected left as given).
TradeoffRecord evaluate(const Mlp& model, const TrainConfig& config, const Splits& splits);

struct AdversaryLosses {
  double adversary_bce = 0.0;   // before the adversary update
  double classifier_bce = 0.0;  // label loss of the classifier
  double objective = 0.0;       // classifier_bce - lambda * adversary_bce
};

/// One alternating step: the adversary (scores, plus labels for EO) takes an
/// Adam step on its BCE for predicting a; then the classifier takes an Adam
/// step on BCE(y) - lambda * BCE_adversary.
AdversaryLosses adversarial_step(Mlp& model, Adam& model_opt, Mlp& adversary, Adam& adversary_opt,
                                 const BalancedBatch& batch, Constraint constraint, double lambda);

struct SummaryRow {
  Method method = Method::kErm;
  Constraint constraint = Constraint::kDp;
  MixSpace space = MixSpace::kInput;
  double lambda = 0.0;
  int runs = 0;
  int failed = 0;
  std::vector<double> mean, stddev;  // in TradeoffTable::metric_names() order
};

class TradeoffTable {
 public:
  std::vector<TradeoffRecord> records;

  static const std::vector<std::string>& metric_names();
  static std::vector<double> metric_values(const TradeoffRecord& record);

  /// Per (method, lambda) mean and sample standard deviation over runs that
  /// did not fail, in first-appearance order.
  std::vector<SummaryRow> summary() const;

  void write_csv(std::ostream& out) const;
  void write_summary_csv(std::ostream& out) const;
};

struct SweepOptions {
  std::vector<Method> methods;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
};

/// Trains every (method, lambda, seed) cell; cells that throw are recorded
/// as failed. Rows are ordered by method, lambda, seed regardless of jobs.
TradeoffTable sweep(const TrainConfig& base, const Dataset& dataset, const SweepOptions& options,
                    const std::function<void(const TradeoffRecord&)>& on_record = {});

/// %.17g formatting used for every CSV number.
std::string format_number(double v);

}  // namespace fairpath
