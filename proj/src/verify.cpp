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

#include "fairpath/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fairpath/closed_form.hpp"
#include "fairpath/dataset.hpp"
#include "fairpath/mixup.hpp"
#include "fairpath/rng.hpp"

namespace fairpath {

namespace {

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double shift_first = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    m(i, 0) += shift_first;
  }
  return m;
}

class Collector {
 public:
  explicit Collector(const VerifyOptions& options) : override_(options.tolerance) {}

  void max_error(const std::string& name, double measured, double tolerance) {
    add(name, measured, tolerance, "max_error", [](double m, double t) { return m <= t; });
  }
  void min_margin(const std::string& name, double measured, double tolerance) {
    add(name, measured, tolerance, "min_margin", [](double m, double t) { return m >= -t; });
  }
  VerifyReport report() && { return std::move(report_); }

 private:
  template <typename Pass>
  void add(const std::string& name, double measured, double tolerance, const char* kind, Pass pass) {
    VerifyCheck c;
    c.name = name;
    c.measured = measured;
    c.tolerance = override_.value_or(tolerance);
    c.kind = kind;
    c.passed = std::isfinite(measured) && pass(measured, c.tolerance);
    report_.checks.push_back(c);
  }

  std::optional<double> override_;
  VerifyReport report_;
};

void closed_form_checks(const VerifyOptions& options, Collector& out) {
  Rng rng(derive_seed(options.seed, "verify-prop2"));
  std::uniform_int_distribution<int> dim(2, 50);
  std::uniform_real_distribution<double> log_lambda(std::log(0.1), std::log(10.0));
  double worst_gd = 0.0, worst_foc = 0.0, worst_identity = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int m = dim(rng);
    ClosedFormInputs in;
    in.delta_pm = gaussian(rng, m, 1).col(0);
    in.delta_01 = gaussian(rng, m, 1).col(0);
    const double l1 = options.lambda1.value_or(std::exp(log_lambda(rng)));
    const double l2 = options.lambda2.value_or(std::exp(log_lambda(rng)));
    const Vector v = prop2_solution(in.delta_pm, in.delta_01, l1, l2);
    worst_gd = std::max(worst_gd, relative_l2_error(v, gd_oracle(Objective::kGapL2, in, l1, l2).v));
    worst_foc = std::max(worst_foc, objective_gradient(Objective::kGapL2, in, v, l1, l2).norm());
    if (l1 == 0.0) worst_identity = std::max(worst_identity, relative_l2_error(v, in.delta_pm / l2));
  }
  out.max_error("prop2_vs_gd_oracle_rel_l2", worst_gd, 1e-4);
  out.max_error("prop2_first_order_condition", worst_foc, 1e-10);
  if (options.lambda1 && *options.lambda1 == 0.0) out.max_error("prop2_lambda1_zero_identity", worst_identity, 1e-15);

  const Dataset ds = synth_two_group(derive_seed(options.seed, "verify-prop3"), 500, 1.0, 2.0, 3);
  const PairedBatch pairs =
      PairedBatch::couple(ds.rows_of(ds.rows_where(0)), ds.rows_of(ds.rows_where(1)), options.seed);
  const auto grid = uniform_grid(101);
  const double l1 = options.lambda1.value_or(1.0), l2 = options.lambda2.value_or(1.0);
  for (const auto& [label, map] : {std::pair<std::string, FeatureMap>{"identity", FeatureMap::identity(3)},
                                   std::pair<std::string, FeatureMap>{"poly2", FeatureMap::polynomial(3, 2)}}) {
    ClosedFormInputs in = mean_embeddings(ds, map);
    in.d = d_matrix(pairs, map, grid);
    const Vector v = prop3_solution(in.delta_pm, in.d, l1, l2);
    out.max_error("prop3_vs_gd_oracle_rel_l2_" + label, relative_l2_error(v, gd_oracle(Objective::kMixupL2, in, l1, l2).v),
                  1e-3);
    out.min_margin("d_matrix_min_eigenvalue_" + label, min_eigenvalue(in.d), 1e-10);
    if (label == "identity") {
      // The coupling's marginals are the group means, so D is the outer product of delta_01.
      out.max_error("identity_d_matrix_vs_outer_product",
                    (in.d - in.delta_01 * in.delta_01.transpose()).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

void path_checks(const VerifyOptions& options, Collector& out) {
  Rng rng(derive_seed(options.seed, "verify-paths"));
  const auto fine = uniform_grid(201);
  const auto coarse = uniform_grid(51);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  double worst_integral = 0.0, worst_jensen = std::numeric_limits<double>::infinity();
  double worst_fd_latent = 0.0, worst_fd_input = 0.0;
  for (int k = 0; k < 6; ++k) {
    const int hidden = k % 2 ? 200 : 64;
    const Mlp model = Mlp::init(derive_seed(options.seed, static_cast<std::uint64_t>(k)), {10, hidden, 1});
    const PairedBatch pair{gaussian(rng, 256, 10), gaussian(rng, 256, 10, 1.0), {}};
    const PathCurve ends = mu_path(model, pair, std::vector<double>{0.0, 0.5, 1.0}, MixSpace::kInput);
    worst_integral = std::max(
        worst_integral, std::abs(path_integral(model, pair, fine, MixSpace::kInput) - (ends.mu.back() - ends.mu.front())));
    for (MixSpace space : {MixSpace::kInput, MixSpace::kLatent}) {
      const PathCurve c = mu_path(model, pair, coarse, space);
      worst_jensen = std::min(worst_jensen, arc_length(model, pair, coarse, space) - std::abs(c.mu.back() - c.mu.front()));
    }
    const double t = unif(rng);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-3); };
    worst_fd_latent = std::max(
        worst_fd_latent, rel(path_derivative(model, pair, t, DerivativeMode::kFiniteDifference, 1e-3, MixSpace::kLatent),
                             path_derivative(model, pair, t, DerivativeMode::kJvp, 0.0, MixSpace::kLatent)));
    // The input path is piecewise smooth in t, so the window must stay below the kink spacing.
    worst_fd_input = std::max(
        worst_fd_input, rel(path_derivative(model, pair, t, DerivativeMode::kFiniteDifference, 1e-7, MixSpace::kInput),
                            path_derivative(model, pair, t, DerivativeMode::kJvp, 0.0, MixSpace::kInput)));
  }
  out.max_error("path_integral_identity_abs", worst_integral, 1e-3);
  out.min_margin("arc_length_minus_endpoint_gap", worst_jensen, 1e-9);
  out.max_error("fd_vs_jvp_latent_h1e-3_rel", worst_fd_latent, 1e-4);
  out.max_error("fd_vs_jvp_input_h1e-7_rel", worst_fd_input, 1e-4);
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const VerifyCheck& c : checks) {
    list.push_back({{"name", c.name},
                    {"measured", c.measured},
                    {"tolerance", c.tolerance},
                    {"kind", c.kind},
                    {"passed", c.passed}});
  }
  return {{"checks", list}, {"passed", passed()}};
}

VerifyReport run_verify(const VerifyOptions& options) {
  Collector out(options);
  closed_form_checks(options, out);
  path_checks(options, out);
  return std::move(out).report();
}

}  // namespace fairpath
