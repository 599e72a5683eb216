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

// fairpath command-line front end.
//
//   fairpath train    --dataset synth --method fair_mixup --lambda 1 --out-dir runs/a
//   fairpath sweep    --dataset adult --methods erm,gap_reg,fair_mixup --lambda-list 0,0.5,1 --seeds 0-9
//   fairpath evaluate --dataset adult --checkpoint runs/a/model.json --config runs/a/manifest.json
//   fairpath path     --dataset adult --checkpoint runs/a/model.json --t-grid 51
//   fairpath closed-form --dataset synth --feature-map poly:2
//   fairpath verify   --lambda1 0
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairpath/closed_form.hpp"
#include "fairpath/dataset.hpp"
#include "fairpath/mixup.hpp"
#include "fairpath/trainer.hpp"
#include "fairpath/verify.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairpath::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(what + ": cannot parse '" + text + "'");
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used == text.size() && text.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw UsageError(what + ": cannot parse seed '" + text + "'");
}

// Comma list whose items are single seeds or inclusive ranges "a-b".
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_seed(item, "--seeds"));
      continue;
    }
    const std::uint64_t lo = parse_seed(item.substr(0, dash), "--seeds");
    const std::uint64_t hi = parse_seed(item.substr(dash + 1), "--seeds");
    if (hi < lo) throw UsageError("--seeds: empty range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw UsageError("--seeds: no seeds given");
  return seeds;
}

std::uint64_t fallback_seed() {
  const char* env = std::getenv("FAIRPATH_SEED");
  return env && *env ? parse_seed(env, "FAIRPATH_SEED") : 0;
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Shared flag groups

struct DataFlags {
  std::string dataset;
  fs::path data_path;
  int synth_n = 2000;
  double synth_group_shift = 1.0;
  double synth_label_shift = 2.0;
  double synth_corr = 0.5;
  int synth_dim = 10;
  std::uint64_t data_seed = 0;

  void add(CLI::App& app) {
    app.add_option("--dataset", dataset, "adult or synth")->required()->check(CLI::IsMember({"adult", "synth"}));
    app.add_option("--data-path", data_path, "directory holding adult.data and adult.test")
        ->default_val(fs::path(FAIRPATH_DEFAULT_DATA_DIR) / "adult");
    app.add_option("--synth-n", synth_n, "synthetic rows per (group, label) cell")->default_val(2000);
    app.add_option("--synth-group-shift", synth_group_shift)->default_val(1.0);
    app.add_option("--synth-label-shift", synth_label_shift)->default_val(2.0);
    app.add_option("--synth-corr", synth_corr, "label-group correlation of the cell sizes")->default_val(0.5);
    app.add_option("--synth-dim", synth_dim)->default_val(10);
    app.add_option("--data-seed", data_seed, "seed of the synthetic generator")->default_val(0);
  }

  Dataset load(std::vector<fs::path>& inputs) const {
    if (dataset == "adult") {
      const fs::path train = data_path / "adult.data", test = data_path / "adult.test";
      inputs.push_back(train);
      inputs.push_back(test);
      return load_adult(train, test);
    }
    return synth_two_group(data_seed, synth_n, synth_group_shift, synth_label_shift, synth_dim, synth_corr);
  }

  json to_json() const {
    if (dataset == "adult") return {{"name", "adult"}, {"path", data_path.string()}};
    return {{"name", "synth"},           {"n_per_cell", synth_n},    {"group_shift", synth_group_shift},
            {"label_shift", synth_label_shift}, {"label_group_corr", synth_corr}, {"dim", synth_dim},
            {"seed", data_seed}};
  }
};

struct ConfigFlags {
  std::string method = "erm";
  std::string constraint = "dp";
  std::string space = "input";
  double lambda = 0.0;
  std::string penalty_form = "abs";
  double h = 0.1;
  std::optional<int> epochs;
  int batch_size = 1000;
  double lr = 1e-3;
  std::optional<std::string> seed;
  std::string hidden_dims = "200";
  std::string split = "0.6,0.2,0.2";
  double ap_slack = 0.01;
  int adversary_hidden = 32;

  void add(CLI::App& app, bool with_method) {
    if (with_method) {
      app.add_option("--method", method)->check(CLI::IsMember({"erm", "gap_reg", "fair_mixup", "adv_debias"}));
      app.add_option("--lambda", lambda)->check(CLI::NonNegativeNumber);
      app.add_option("--seed", seed, "run seed (default: $FAIRPATH_SEED, then 0)");
    }
    app.add_option("--constraint", constraint)->check(CLI::IsMember({"dp", "eo"}));
    app.add_option("--space", space, "mixup space for fair_mixup")->check(CLI::IsMember({"input", "latent"}));
    app.add_option("--penalty-form", penalty_form)->check(CLI::IsMember({"abs", "squared"}));
    app.add_option("--h", h, "finite-difference half-width; t is drawn from [h, 1-h]");
    app.add_option("--epochs", epochs, "default 20 for adult, 50 for synth");
    app.add_option("--batch-size", batch_size);
    app.add_option("--lr", lr);
    app.add_option("--hidden-dims", hidden_dims, "comma-separated hidden widths");
    app.add_option("--split", split, "train,val,test or train,test fractions");
    app.add_option("--selection-ap-slack", ap_slack);
    app.add_option("--adversary-hidden", adversary_hidden);
  }

  TrainConfig build(const std::string& dataset) const {
    TrainConfig c;
    c.method = parse_method(method);
    c.constraint = parse_constraint(constraint);
    c.space = parse_mix_space(space);
    c.lambda = lambda;
    c.penalty_form = parse_penalty_form(penalty_form);
    c.h = h;
    c.epochs = epochs.value_or(dataset == "adult" ? 20 : 50);
    c.batch_size = batch_size;
    c.learning_rate = lr;
    c.seed = seed ? parse_seed(*seed, "--seed") : fallback_seed();
    c.hidden_dims.clear();
    for (const std::string& w : split_list(hidden_dims)) {
      c.hidden_dims.push_back(static_cast<int>(parse_double(w, "--hidden-dims")));
    }
    try {
      c.split = SplitSpec::parse(split, c.seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    c.selection_ap_slack = ap_slack;
    c.adversary_hidden = adversary_hidden;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct RunContext {
  std::string command;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::string started_at = utc_timestamp();
};

void finish(const RunContext& ctx, const fs::path& out_dir, const json& config, const std::vector<fs::path>& inputs,
            const std::vector<fs::path>& outputs) {
  RunManifest m;
  m.command = ctx.command;
  m.config = config;
  m.inputs = inputs;
  m.outputs = outputs;
  m.started_at = ctx.started_at;
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  write_atomic(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_train(const RunContext& ctx, const DataFlags& data, const ConfigFlags& flags, const fs::path& out_dir) {
  const TrainConfig config = flags.build(data.dataset);
  std::vector<fs::path> inputs;
  const Dataset ds = data.load(inputs);
  const TrainResult result = train(config, ds, [](const EpochMetrics& m) {
    std::cerr << "epoch " << m.epoch << " objective " << m.train_objective << " val_ap " << m.val_ap << " val_ddp "
              << m.val_ddp << " val_deo " << m.val_deo << "\n";
  });
  json record = result.record.to_json();
  json history = json::array();
  for (const EpochMetrics& m : result.history) {
    history.push_back({{"epoch", m.epoch},
                       {"train_objective", m.train_objective},
                       {"train_penalty", m.train_penalty},
                       {"val_ap", m.val_ap},
                       {"val_ddp", m.val_ddp},
                       {"val_deo", m.val_deo}});
  }
  record["history"] = history;
  const fs::path model_path = out_dir / "model.json", record_path = out_dir / "record.json";
  write_atomic(model_path, to_checkpoint_json(result.model) + "\n");
  write_atomic(record_path, record.dump(2) + "\n");
  finish(ctx, out_dir, {{"train", config.to_json()}, {"dataset", data.to_json()}}, inputs, {model_path, record_path});
  std::cout << record_path.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const RunContext& ctx, const DataFlags& data, const ConfigFlags& flags, const std::string& methods,
              const std::string& lambdas, const std::optional<std::string>& seeds, int jobs, const fs::path& out_dir) {
  const TrainConfig base = flags.build(data.dataset);
  SweepOptions options;
  for (const std::string& m : split_list(methods)) {
    try {
      options.methods.push_back(parse_method(m));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  for (const std::string& l : split_list(lambdas)) options.lambdas.push_back(parse_double(l, "--lambda-list"));
  options.seeds = seeds ? parse_seed_list(*seeds) : std::vector<std::uint64_t>{fallback_seed()};
  options.jobs = jobs;
  if (options.methods.empty() || options.lambdas.empty()) throw UsageError("sweep needs methods and lambdas");

  std::vector<fs::path> inputs;
  const Dataset ds = data.load(inputs);
  const TradeoffTable table = sweep(base, ds, options, [](const TradeoffRecord& r) {
    std::cerr << to_string(r.method) << " lambda " << r.lambda << " seed " << r.seed
              << (r.failed ? " FAILED: " + r.error : " test_ap " + format_number(r.test_ap)) << "\n";
  });
  std::ostringstream rows, summary;
  table.write_csv(rows);
  table.write_summary_csv(summary);
  const fs::path rows_path = out_dir / "tradeoff.csv", summary_path = out_dir / "tradeoff_summary.csv";
  write_atomic(rows_path, rows.str());
  write_atomic(summary_path, summary.str());

  json method_names = json::array();
  for (Method m : options.methods) method_names.push_back(to_string(m));
  finish(ctx, out_dir,
         {{"base", base.to_json()},
          {"methods", method_names},
          {"lambdas", options.lambdas},
          {"seeds", options.seeds},
          {"jobs", jobs},
          {"dataset", data.to_json()}},
         inputs, {rows_path, summary_path});
  std::cout << rows_path.string() << "\n";
  bool any_failed = false;
  for (const TradeoffRecord& r : table.records) any_failed = any_failed || r.failed;
  return any_failed ? kExitFailure : kExitOk;
}

TrainConfig config_from_file(const fs::path& path) {
  const json doc = json::parse(read_file(path));
  // Accepts a train manifest, or a bare TrainConfig document.
  if (doc.contains("config") && doc["config"].contains("train")) return TrainConfig::from_json(doc["config"]["train"]);
  return TrainConfig::from_json(doc);
}

int cmd_evaluate(const RunContext& ctx, const DataFlags& data, const fs::path& checkpoint, const fs::path& config_path,
                 const fs::path& out_dir) {
  const TrainConfig config = config_from_file(config_path);
  const Mlp model = from_checkpoint_json(read_file(checkpoint));
  std::vector<fs::path> inputs{checkpoint, config_path};
  const Dataset ds = data.load(inputs);
  TradeoffRecord record = evaluate(model, config, split_for(config, ds));
  const fs::path path = out_dir / "evaluation.json";
  write_atomic(path, record.to_json().dump(2) + "\n");
  finish(ctx, out_dir, {{"train", config.to_json()}, {"dataset", data.to_json()}}, inputs, {path});
  std::cout << path.string() << "\n";
  return kExitOk;
}

int cmd_path(const RunContext& ctx, const DataFlags& data, const fs::path& checkpoint,
             const std::optional<fs::path>& config_path, const ConfigFlags& flags, int grid_points,
             const fs::path& out_dir) {
  const TrainConfig config = config_path ? config_from_file(*config_path) : flags.build(data.dataset);
  if (!fs::exists(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint.string());
  const Mlp model = from_checkpoint_json(read_file(checkpoint));
  std::vector<fs::path> inputs{checkpoint};
  if (config_path) inputs.push_back(*config_path);
  const Dataset ds = data.load(inputs);
  const Dataset test = split_for(config, ds).test;
  const auto grid = uniform_grid(grid_points);

  // One coupling per constraint term, built from the full test groups.
  std::vector<std::pair<std::string, PairedBatch>> pairings;
  const std::uint64_t couple_seed = derive_seed(config.seed, "couple");
  if (config.constraint == Constraint::kDp) {
    pairings.emplace_back("dp", PairedBatch::couple(test.rows_of(test.rows_where(0)), test.rows_of(test.rows_where(1)),
                                                    couple_seed));
  } else {
    for (int y = 0; y < 2; ++y) {
      pairings.emplace_back("y" + std::to_string(y),
                            PairedBatch::couple(test.rows_of(test.rows_where(0, y)), test.rows_of(test.rows_where(1, y)),
                                                couple_seed + static_cast<std::uint64_t>(y)));
    }
  }

  const GroupedScores scores = test.grouped(model.forward(test.x));
  json summary = {{"test_ddp", delta_dp(scores)}, {"test_deo", delta_eo(scores)}, {"grid_points", grid_points}};
  std::vector<fs::path> outputs;
  for (MixSpace space : {MixSpace::kInput, MixSpace::kLatent}) {
    std::ostringstream csv;
    csv << "pairing,t,mu,mu_calibrated\n";
    json per_space = json::object();
    for (const auto& [name, pair] : pairings) {
      const PathCurve c = mu_path(model, pair, grid, space);
      for (std::size_t k = 0; k < c.t.size(); ++k) {
        csv << name << ',' << format_number(c.t[k]) << ',' << format_number(c.mu[k]) << ','
            << format_number(c.mu_calibrated[k]) << '\n';
      }
      per_space[name] = {{"arc_length", arc_length(model, pair, grid, space)},
                         {"endpoint_abs", std::abs(c.mu_calibrated.back())}};
    }
    const fs::path path = out_dir / ("path_" + to_string(space) + ".csv");
    write_atomic(path, csv.str());
    outputs.push_back(path);
    summary[to_string(space)] = per_space;
  }
  const fs::path summary_path = out_dir / "path_summary.json";
  write_atomic(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);
  finish(ctx, out_dir, {{"train", config.to_json()}, {"dataset", data.to_json()}, {"grid_points", grid_points}},
         inputs, outputs);
  std::cout << summary_path.string() << "\n";
  return kExitOk;
}

FeatureMap parse_feature_map(const std::string& text, int dim, std::uint64_t seed) {
  const auto parts = [&] {
    std::vector<std::string> p;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ':')) p.push_back(item);
    return p;
  }();
  if (parts.size() == 1 && parts[0] == "identity") return FeatureMap::identity(dim);
  if (parts.size() == 2 && parts[0] == "poly") return FeatureMap::polynomial(dim, static_cast<int>(parse_double(parts[1], "--feature-map")));
  if (parts.size() == 3 && parts[0] == "rff") {
    return FeatureMap::random_fourier(dim, static_cast<int>(parse_double(parts[1], "--feature-map")),
                                      parse_double(parts[2], "--feature-map"), seed);
  }
  throw UsageError("--feature-map: expected identity, poly:<degree> or rff:<count>:<bandwidth>, got '" + text + "'");
}

int cmd_closed_form(const RunContext& ctx, const DataFlags& data, const std::string& map_text, double lambda1,
                    double lambda2, int grid_points, std::uint64_t seed, const fs::path& out_dir) {
  std::vector<fs::path> inputs;
  const Dataset ds = data.load(inputs);
  const FeatureMap map = parse_feature_map(map_text, ds.dim(), derive_seed(seed, "random-fourier"));
  ClosedFormInputs in = mean_embeddings(ds, map);
  const PairedBatch pairs =
      PairedBatch::couple(ds.rows_of(ds.rows_where(0)), ds.rows_of(ds.rows_where(1)), derive_seed(seed, "couple"));
  in.d = d_matrix(pairs, map, uniform_grid(grid_points));
  const Vector v2 = prop2_solution(in.delta_pm, in.delta_01, lambda1, lambda2);
  const Vector v3 = prop3_solution(in.delta_pm, in.d, lambda1, lambda2);
  json doc = json::parse(to_json(in));
  doc["feature_map"] = map.describe();
  doc["lambda1"] = lambda1;
  doc["lambda2"] = lambda2;
  doc["gap_l2_solution"] = std::vector<double>(v2.data(), v2.data() + v2.size());
  doc["mixup_l2_solution"] = std::vector<double>(v3.data(), v3.data() + v3.size());
  doc["d_min_eigenvalue"] = min_eigenvalue(in.d);
  const fs::path path = out_dir / "closed_form.json";
  write_atomic(path, doc.dump(2) + "\n");
  finish(ctx, out_dir,
         {{"feature_map", map.describe()},
          {"lambda1", lambda1},
          {"lambda2", lambda2},
          {"grid_points", grid_points},
          {"seed", seed},
          {"dataset", data.to_json()}},
         inputs, {path});
  std::cout << path.string() << "\n";
  return kExitOk;
}

int cmd_verify(const RunContext& ctx, const VerifyOptions& options, const std::optional<fs::path>& out_dir) {
  const VerifyReport report = run_verify(options);
  for (const VerifyCheck& c : report.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " measured " << format_number(c.measured) << " tolerance "
              << format_number(c.tolerance) << "\n";
  }
  const std::string text = report.to_json().dump(2) + "\n";
  if (out_dir) {
    const fs::path path = *out_dir / "verify.json";
    write_atomic(path, text);
    json config = {{"seed", options.seed}};
    if (options.lambda1) config["lambda1"] = *options.lambda1;
    if (options.lambda2) config["lambda2"] = *options.lambda2;
    if (options.tolerance) config["tolerance"] = *options.tolerance;
    finish(ctx, *out_dir, config, {}, {path});
  } else {
    std::cout << text;
  }
  return report.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"fairpath: fairness-penalized training, path diagnostics and closed-form checks"};
  app.require_subcommand(1);
  // "--h" is a training flag, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  RunContext ctx;
  ctx.command = join_args(argc, argv);

  DataFlags data;
  ConfigFlags flags;
  fs::path out_dir = ".";

  CLI::App* train_cmd = app.add_subcommand("train", "train one model");
  data.add(*train_cmd);
  flags.add(*train_cmd, true);
  train_cmd->add_option("--out-dir", out_dir);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "train over methods x lambdas x seeds");
  std::string methods = "erm,gap_reg,fair_mixup", lambdas = "0,0.1,0.5,1,2,5,10";
  std::optional<std::string> seeds;
  int jobs = 1;
  data.add(*sweep_cmd);
  flags.add(*sweep_cmd, false);
  sweep_cmd->add_option("--methods", methods);
  sweep_cmd->add_option("--lambda-list", lambdas);
  sweep_cmd->add_option("--seeds", seeds, "comma list of seeds or ranges a-b");
  sweep_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out-dir", out_dir);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on its run's splits");
  fs::path checkpoint, config_path;
  data.add(*eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--config", config_path, "train manifest or TrainConfig JSON")->required();
  eval_cmd->add_option("--out-dir", out_dir);

  CLI::App* path_cmd = app.add_subcommand("path", "emit mixup path curves on the test split");
  std::optional<fs::path> path_config;
  int grid_points = 51;
  data.add(*path_cmd);
  flags.add(*path_cmd, true);
  path_cmd->add_option("--checkpoint", checkpoint)->required();
  path_cmd->add_option("--config", path_config, "train manifest; overrides the config flags");
  path_cmd->add_option("--t-grid", grid_points, "number of uniform t points")->check(CLI::Range(3, 100000));
  path_cmd->add_option("--out-dir", out_dir);

  CLI::App* cf_cmd = app.add_subcommand("closed-form", "closed-form solutions for a linear-in-features model");
  std::string feature_map = "identity";
  double cf_lambda1 = 1.0, cf_lambda2 = 1.0;
  int cf_grid = 101;
  std::optional<std::string> cf_seed;
  data.add(*cf_cmd);
  cf_cmd->add_option("--feature-map", feature_map, "identity, poly:<degree> or rff:<count>:<bandwidth>");
  cf_cmd->add_option("--lambda1", cf_lambda1)->check(CLI::NonNegativeNumber);
  cf_cmd->add_option("--lambda2", cf_lambda2)->check(CLI::PositiveNumber);
  cf_cmd->add_option("--t-grid", cf_grid)->check(CLI::Range(3, 100000));
  cf_cmd->add_option("--seed", cf_seed);
  cf_cmd->add_option("--out-dir", out_dir);

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the seeded verification suite");
  VerifyOptions verify_options;
  std::optional<std::string> verify_seed;
  std::optional<fs::path> verify_out;
  verify_cmd->add_option("--seed", verify_seed);
  verify_cmd->add_option("--lambda1", verify_options.lambda1)->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--lambda2", verify_options.lambda2)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--tolerance", verify_options.tolerance, "replace every check's tolerance");
  verify_cmd->add_option("--out-dir", verify_out, "write verify.json and a manifest here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ctx, data, flags, out_dir);
    if (*sweep_cmd) return cmd_sweep(ctx, data, flags, methods, lambdas, seeds, jobs, out_dir);
    if (*eval_cmd) return cmd_evaluate(ctx, data, checkpoint, config_path, out_dir);
    if (*path_cmd) return cmd_path(ctx, data, checkpoint, path_config, flags, grid_points, out_dir);
    if (*cf_cmd) {
      const std::uint64_t seed = cf_seed ? parse_seed(*cf_seed, "--seed") : fallback_seed();
      return cmd_closed_form(ctx, data, feature_map, cf_lambda1, cf_lambda2, cf_grid, seed, out_dir);
    }
    if (*verify_cmd) {
      verify_options.seed = verify_seed ? parse_seed(*verify_seed, "--seed") : fallback_seed();
      return cmd_verify(ctx, verify_options, verify_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fairpath::cli

int main(int argc, char** argv) { return fairpath::cli::run(argc, argv); }
