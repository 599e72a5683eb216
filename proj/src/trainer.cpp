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

#include "fairpath/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "fairpath/metrics.hpp"

namespace fairpath {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string describe_step(int epoch, int batch, double lambda) {
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ", lambda " + format_number(lambda);
}

std::vector<Matrix> grads_of(const Tape& tape, std::span<const Var> params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (Var p : params) out.push_back(tape.grad(p));
  return out;
}

// |mean over block b0 - mean over block b1| for each group pair, summed.
Var gap_from_scores(Tape& tape, Var scores, const BalancedBatch& batch) {
  Var total;
  for (std::size_t k = 0; k + 1 < batch.blocks.size(); k += 2) {
    const auto [o0, n0] = batch.blocks[k];
    const auto [o1, n1] = batch.blocks[k + 1];
    Var diff = tape.abs(tape.sub(tape.mean(tape.slice_rows(scores, o0, n0)), tape.mean(tape.slice_rows(scores, o1, n1))));
    total = total.valid() ? tape.add(total, diff) : diff;
  }
  return total;
}

Matrix label_column(std::span<const int> labels) {
  Matrix y(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = labels[i];
  return y;
}

Matrix adversary_input(const Matrix& scores, const BalancedBatch& batch, Constraint constraint) {
  if (constraint == Constraint::kDp) return scores;
  Matrix z(scores.rows(), 2);
  z.col(0) = scores.col(0);
  z.col(1) = label_column(batch.y).col(0);
  return z;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string space_label(Method method, MixSpace space) {
  return method == Method::kFairMixup ? to_string(space) : "none";
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kErm:
      return "erm";
    case Method::kGapReg:
      return "gap_reg";
    case Method::kFairMixup:
      return "fair_mixup";
    case Method::kAdvDebias:
      return "adv_debias";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  for (Method m : {Method::kErm, Method::kGapReg, Method::kFairMixup, Method::kAdvDebias}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + text + "' (expected erm|gap_reg|fair_mixup|adv_debias)");
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam: betas must lie in [0, 1)");
  }
}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: one gradient per parameter required");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter list changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], grads[i], "Adam::step");
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i]->array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

// ---------------------------------------------------------------------------
// TrainConfig

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("h must lie in (0, 0.5)");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  const int parts = constraint == Constraint::kDp ? 2 : 4;
  if (batch_size % parts != 0) {
    throw std::invalid_argument("batch size must be divisible by " + std::to_string(parts) + " for " +
                                to_string(constraint));
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  for (int d : hidden_dims) {
    if (d < 1) throw std::invalid_argument("hidden dims must be >= 1");
  }
  if (!(selection_ap_slack >= 0.0)) throw std::invalid_argument("selection AP slack must be >= 0");
  if (adversary_hidden < 1) throw std::invalid_argument("adversary hidden width must be >= 1");
  split.validate();
}

std::vector<int> TrainConfig::layer_dims(int input_dim) const {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);
  return dims;
}

nlohmann::json TrainConfig::to_json() const {
  return {
      {"method", to_string(method)},
      {"constraint", to_string(constraint)},
      {"space", to_string(space)},
      {"lambda", lambda},
      {"penalty_form", to_string(penalty_form)},
      {"h", h},
      {"t_sampling", "uniform[h,1-h], one t per batch shared across labels"},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"learning_rate", learning_rate},
      {"seed", seed},
      {"hidden_dims", hidden_dims},
      {"split", {{"train", split.train}, {"val", split.val}, {"test", split.test}}},
      {"selection", {{"rule", "min validation gap s.t. AP >= best - slack"}, {"ap_slack", selection_ap_slack}}},
      {"adversary_hidden", adversary_hidden},
      {"optimizer", {{"name", "adam"}, {"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}}},
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& doc) {
  TrainConfig c;
  c.method = parse_method(doc.at("method").get<std::string>());
  c.constraint = parse_constraint(doc.at("constraint").get<std::string>());
  c.space = parse_mix_space(doc.at("space").get<std::string>());
  c.lambda = doc.at("lambda").get<double>();
  c.penalty_form = parse_penalty_form(doc.at("penalty_form").get<std::string>());
  c.h = doc.at("h").get<double>();
  c.epochs = doc.at("epochs").get<int>();
  c.batch_size = doc.at("batch_size").get<int>();
  c.learning_rate = doc.at("learning_rate").get<double>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.hidden_dims = doc.at("hidden_dims").get<std::vector<int>>();
  const auto& s = doc.at("split");
  c.split.train = s.at("train").get<double>();
  c.split.val = s.at("val").get<double>();
  c.split.test = s.at("test").get<double>();
  c.split.seed = c.seed;
  c.selection_ap_slack = doc.at("selection").at("ap_slack").get<double>();
  c.adversary_hidden = doc.at("adversary_hidden").get<int>();
  c.validate();
  return c;
}

std::string TrainConfig::fingerprint() const {
  nlohmann::json doc = to_json();
  if (method == Method::kErm) doc["lambda"] = 0.0;
  if (method != Method::kFairMixup) doc["space"] = "none";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Records and selection

nlohmann::json TradeoffRecord::to_json() const {
  nlohmann::json doc = {
      {"fingerprint", fingerprint},
      {"method", to_string(method)},
      {"constraint", to_string(constraint)},
      {"space", space_label(method, space)},
      {"lambda", lambda},
      {"seed", seed},
      {"epoch_selected", epoch_selected},
      {"failed", failed},
  };
  if (failed) {
    doc["error"] = error;
    return doc;
  }
  const auto names = TradeoffTable::metric_names();
  const auto values = TradeoffTable::metric_values(*this);
  for (std::size_t i = 0; i < names.size(); ++i) doc[names[i]] = values[i];
  return doc;
}

double constraint_gap(const EpochMetrics& m, Constraint constraint) {
  return constraint == Constraint::kDp ? m.val_ddp : m.val_deo;
}

int select_model(std::span<const EpochMetrics> history, Constraint constraint, double ap_slack) {
  if (history.empty()) throw std::invalid_argument("select_model: empty history");
  std::size_t best_ap = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].val_ap > history[best_ap].val_ap) best_ap = i;
  }
  const double floor = history[best_ap].val_ap - ap_slack;
  int chosen = -1;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!(history[i].val_ap >= floor)) continue;
    if (chosen < 0 || constraint_gap(history[i], constraint) < constraint_gap(history[static_cast<std::size_t>(chosen)], constraint)) {
      chosen = static_cast<int>(i);
    }
  }
  return chosen >= 0 ? chosen : static_cast<int>(best_ap);
}

Splits split_for(const TrainConfig& config, const Dataset& dataset) {
  SplitSpec spec = config.split;
  spec.seed = config.seed;
  return split(dataset, spec);
}

TradeoffRecord evaluate(const Mlp& model, const TrainConfig& config, const Splits& splits) {
  TradeoffRecord r;
  r.fingerprint = config.fingerprint();
  r.method = config.method;
  r.constraint = config.constraint;
  r.space = config.space;
  r.lambda = config.lambda;
  r.seed = config.seed;
  const GroupedScores train = splits.train.grouped(model.forward(splits.train.x));
  const GroupedScores test = splits.test.grouped(model.forward(splits.test.x));
  r.train_ap = average_precision(train.scores(), train.labels());
  r.test_ap = average_precision(test.scores(), test.labels());
  r.train_ddp = delta_dp(train);
  r.test_ddp = delta_dp(test);
  r.train_deo = delta_eo(train);
  r.test_deo = delta_eo(test);
  const ThresholdSet deciles = ThresholdSet::deciles();
  r.test_mean_thresh_dp = mean_thresholded_dp(test, deciles);
  r.test_mean_thresh_eo = mean_thresholded_eo(test, deciles);
  return r;
}

// ---------------------------------------------------------------------------
// Training

AdversaryLosses adversarial_step(Mlp& model, Adam& model_opt, Mlp& adversary, Adam& adversary_opt,
                                 const BalancedBatch& batch, Constraint constraint, double lambda) {
  AdversaryLosses out;
  {
    Tape tape;
    BoundMlp adv(tape, adversary);
    Var z = tape.constant(adversary_input(model.forward(batch.x), batch, constraint));
    Var loss = bce_loss(tape, adv.forward(z), batch.a);
    out.adversary_bce = tape.scalar(loss);
    if (!std::isfinite(out.adversary_bce)) throw TrainingAborted("non-finite adversary loss");
    tape.backward(loss);
    const auto grads = grads_of(tape, adv.params());
    auto params = adversary.parameters();
    adversary_opt.step(params, grads);
  }
  Tape tape;
  BoundMlp clf(tape, model);
  Var scores = clf.forward(tape.constant(batch.x));
  Var objective = bce_loss(tape, scores, batch.y);
  out.classifier_bce = tape.scalar(objective);
  if (lambda > 0.0) {
    BoundMlp adv(tape, adversary);
    Var z = constraint == Constraint::kDp ? scores : tape.concat_cols(scores, tape.constant(label_column(batch.y)));
    objective = tape.sub(objective, tape.scale(bce_loss(tape, adv.forward(z), batch.a), lambda));
  }
  out.objective = tape.scalar(objective);
  if (!std::isfinite(out.objective)) throw TrainingAborted("non-finite classifier objective");
  tape.backward(objective);
  const auto grads = grads_of(tape, clf.params());
  auto params = model.parameters();
  model_opt.step(params, grads);
  return out;
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch) {
  config.validate();
  const Splits splits = split_for(config, dataset);
  const double lambda = config.method == Method::kErm ? 0.0 : config.lambda;

  Mlp model = Mlp::init(derive_seed(config.seed, "model"), config.layer_dims(dataset.dim()));
  Adam opt(config.learning_rate);
  BalancedBatchStream stream(splits.train, config.constraint, config.batch_size, derive_seed(config.seed, "batches"));
  Rng t_rng(derive_seed(config.seed, "mixing-t"));

  Mlp adversary;
  Adam adversary_opt(config.learning_rate);
  if (config.method == Method::kAdvDebias) {
    const int in = config.constraint == Constraint::kDp ? 1 : 2;
    adversary = Mlp::init(derive_seed(config.seed, "adversary"), {in, config.adversary_hidden, 1});
  }
  const PenaltyOptions penalty_options{config.space, config.h, config.penalty_form};

  TrainResult result;
  std::vector<Mlp> snapshots;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    for (int b = 0; b < stream.batches_per_epoch(); ++b) {
      const BalancedBatch batch = stream.next();
      try {
        if (config.method == Method::kAdvDebias) {
          const AdversaryLosses losses = adversarial_step(model, opt, adversary, adversary_opt, batch,
                                                          config.constraint, lambda);
          m.train_objective += losses.objective;
          m.train_penalty += losses.adversary_bce;
          continue;
        }
        Tape tape;
        BoundMlp bound(tape, model);
        Var scores = bound.forward(tape.constant(batch.x));
        Var objective = bce_loss(tape, scores, batch.y);
        if (lambda > 0.0 && config.method != Method::kErm) {
          Var penalty = config.method == Method::kGapReg
                            ? gap_from_scores(tape, scores, batch)
                            : fair_mixup_penalty(bound, batch.pairs, sample_mixing_t(t_rng, config.h), penalty_options);
          m.train_penalty += tape.scalar(penalty);
          objective = tape.add(objective, tape.scale(penalty, lambda));
        }
        const double value = tape.scalar(objective);
        if (!std::isfinite(value)) throw TrainingAborted("non-finite loss");
        m.train_objective += value;
        tape.backward(objective);
        const auto grads = grads_of(tape, bound.params());
        auto params = model.parameters();
        opt.step(params, grads);
      } catch (const std::exception& e) {
        throw TrainingAborted(std::string(e.what()) + " at " + describe_step(epoch, b, lambda));
      }
    }
    for (Matrix* p : model.parameters()) {
      if (!all_finite(*p)) throw TrainingAborted("non-finite parameters after " + describe_step(epoch, -1, lambda));
    }
    m.train_objective /= stream.batches_per_epoch();
    m.train_penalty /= stream.batches_per_epoch();
    const GroupedScores val = splits.val.grouped(model.forward(splits.val.x));
    m.val_ap = average_precision(val.scores(), val.labels());
    m.val_ddp = delta_dp(val);
    m.val_deo = delta_eo(val);
    result.history.push_back(m);
    snapshots.push_back(model);
    if (on_epoch) on_epoch(m);
  }

  const int selected = select_model(result.history, config.constraint, config.selection_ap_slack);
  result.model = std::move(snapshots[static_cast<std::size_t>(selected)]);
  result.record = evaluate(result.model, config, splits);
  result.record.epoch_selected = selected;
  return result;
}

// ---------------------------------------------------------------------------
// Tables and sweeps

const std::vector<std::string>& TradeoffTable::metric_names() {
  static const std::vector<std::string> names = {"train_ap",  "test_ap",  "train_ddp",           "test_ddp",
                                                 "train_deo", "test_deo", "test_mean_thresh_dp", "test_mean_thresh_eo"};
  return names;
}

std::vector<double> TradeoffTable::metric_values(const TradeoffRecord& r) {
  return {r.train_ap, r.test_ap, r.train_ddp, r.test_ddp, r.train_deo, r.test_deo, r.test_mean_thresh_dp,
          r.test_mean_thresh_eo};
}

std::vector<SummaryRow> TradeoffTable::summary() const {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<std::vector<double>>> samples;  // [row][metric][run]
  const std::size_t k = metric_names().size();
  for (const TradeoffRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SummaryRow& s) { return s.method == r.method && s.lambda == r.lambda; });
    if (it == rows.end()) {
      SummaryRow s;
      s.method = r.method;
      s.constraint = r.constraint;
      s.space = r.space;
      s.lambda = r.lambda;
      rows.push_back(s);
      samples.emplace_back(k);
      it = rows.end() - 1;
    }
    auto& bucket = samples[static_cast<std::size_t>(it - rows.begin())];
    if (r.failed) {
      ++it->failed;
      continue;
    }
    ++it->runs;
    const auto values = metric_values(r);
    for (std::size_t j = 0; j < k; ++j) bucket[j].push_back(values[j]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto& xs = samples[i][j];
      if (xs.empty()) {
        rows[i].mean.push_back(kNaN);
        rows[i].stddev.push_back(kNaN);
        continue;
      }
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      rows[i].mean.push_back(mean);
      rows[i].stddev.push_back(xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0);
    }
  }
  return rows;
}

void TradeoffTable::write_csv(std::ostream& out) const {
  out << "method,constraint,space,lambda,seed,epoch_selected";
  for (const auto& name : metric_names()) out << ',' << name;
  out << ",fingerprint,status,error\n";
  for (const TradeoffRecord& r : records) {
    out << to_string(r.method) << ',' << to_string(r.constraint) << ',' << space_label(r.method, r.space) << ','
        << format_number(r.lambda) << ',' << r.seed << ',' << r.epoch_selected;
    for (double v : metric_values(r)) out << ',' << format_number(r.failed ? kNaN : v);
    out << ',' << r.fingerprint << ',' << (r.failed ? "failed" : "ok") << ',' << csv_quote(r.error) << '\n';
  }
}

void TradeoffTable::write_summary_csv(std::ostream& out) const {
  out << "method,constraint,space,lambda,runs,failed";
  for (const auto& name : metric_names()) out << ',' << name << "_mean," << name << "_std";
  out << '\n';
  for (const SummaryRow& s : summary()) {
    out << to_string(s.method) << ',' << to_string(s.constraint) << ',' << space_label(s.method, s.space) << ','
        << format_number(s.lambda) << ',' << s.runs << ',' << s.failed;
    for (std::size_t j = 0; j < s.mean.size(); ++j) {
      out << ',' << format_number(s.mean[j]) << ',' << format_number(s.stddev[j]);
    }
    out << '\n';
  }
}

TradeoffTable sweep(const TrainConfig& base, const Dataset& dataset, const SweepOptions& options,
                    const std::function<void(const TradeoffRecord&)>& on_record) {
  if (options.methods.empty() || options.lambdas.empty() || options.seeds.empty()) {
    throw std::invalid_argument("sweep: methods, lambdas and seeds must be non-empty");
  }
  if (options.jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");

  struct Cell {
    TrainConfig config;
    int source = -1;  // ERM ignores lambda; later lambdas copy the first run
  };
  std::vector<Cell> cells;
  std::map<std::uint64_t, int> erm_runs;
  for (Method method : options.methods) {
    for (double lambda : options.lambdas) {
      for (std::uint64_t seed : options.seeds) {
        Cell cell{base};
        cell.config.method = method;
        cell.config.lambda = lambda;
        cell.config.seed = seed;
        cell.config.split.seed = seed;
        if (method == Method::kErm) {
          auto [it, inserted] = erm_runs.emplace(seed, static_cast<int>(cells.size()));
          if (!inserted) cell.source = it->second;
        }
        cells.push_back(std::move(cell));
      }
    }
  }

  TradeoffTable table;
  table.records.resize(cells.size());
  std::mutex report;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      if (cells[i].source >= 0) continue;
      TradeoffRecord record;
      try {
        record = train(cells[i].config, dataset).record;
      } catch (const std::exception& e) {
        record.fingerprint = cells[i].config.fingerprint();
        record.method = cells[i].config.method;
        record.constraint = cells[i].config.constraint;
        record.space = cells[i].config.space;
        record.lambda = cells[i].config.lambda;
        record.seed = cells[i].config.seed;
        record.failed = true;
        record.error = e.what();
      }
      table.records[i] = record;
      if (on_record) {
        std::lock_guard<std::mutex> lock(report);
        on_record(record);
      }
    }
  };
  const int threads = std::min<int>(options.jobs, static_cast<int>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].source < 0) continue;
    table.records[i] = table.records[static_cast<std::size_t>(cells[i].source)];
    table.records[i].lambda = cells[i].config.lambda;
  }
  return table;
}

}  // namespace fairpath
