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

// Mixup paths between two sensitive groups.
//
// For paired samples (x0_i, x1_i) with weights w_i the path is
//
//   mu(t) = sum_i w_i f(T_i(t)),   T_i(t) = (1 - t) x0_i + t x1_i,
//
// so mu(0) is the weighted mean score of group 0 and mu(1) that of group 1.
// In latent space the interpolation acts on encoder outputs g(x) and f is the
// prediction head. Everything here is either a pure diagnostic (path values,
// derivatives, arc length) or a penalty recorded on a gradient tape.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairpath/mlp.hpp"
#include "fairpath/rng.hpp"
#include "fairpath/tensor.hpp"

namespace fairpath {

enum class MixSpace { kInput, kLatent };
enum class DerivativeMode { kFiniteDifference, kJvp };
enum class PenaltyForm { kAbs, kSquared };

std::string to_string(MixSpace space);
std::string to_string(PenaltyForm form);
MixSpace parse_mix_space(const std::string& text);
PenaltyForm parse_penalty_form(const std::string& text);

/// Row i of x0 is paired with row i of x1. Empty weights mean uniform 1/n.
struct PairedBatch {
  Matrix x0;
  Matrix x1;
  Vector weights;

  Eigen::Index size() const { return x0.rows(); }
  bool uniform() const { return weights.size() == 0; }
  void validate() const;

  /// Couples two groups of possibly different sizes with a weighted
  /// north-west-corner plan after a seeded shuffle of both groups. Each
  /// group's marginal is exactly uniform, so the path endpoints are the full
  /// group means.
  static PairedBatch couple(const Matrix& group0, const Matrix& group1, std::uint64_t seed);
};

/// Weighted mean of a score column under the batch's pair weights.
double pair_mean(const PairedBatch& pair, const Matrix& scores);

struct PathCurve {
  std::vector<double> t;
  std::vector<double> mu;
  std::vector<double> mu_calibrated;  // mu(t) - mu(0)
};

/// `points` equally spaced values from 0 to 1 inclusive (points >= 2).
std::vector<double> uniform_grid(int points);

/// Composite trapezoid rule for samples f on an ascending grid t.
double trapezoid(std::span<const double> t, std::span<const double> f);

Matrix mixup_interpolate(const PairedBatch& pair, double t, MixSpace space, const Mlp& model);

double mu_at(const Mlp& model, const PairedBatch& pair, double t, MixSpace space);
PathCurve mu_path(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space);

/// d mu / dt at t. kFiniteDifference: (mu(t+h) - mu(t-h)) / 2h, requires
/// [t-h, t+h] inside [0,1]. kJvp: exact forward-mode derivative along
/// x1 - x0 (or g(x1) - g(x0)); h is ignored.
double path_derivative(const Mlp& model, const PairedBatch& pair, double t, DerivativeMode mode, double h,
                       MixSpace space);

/// Arc length R_T = int_0^1 |d mu/dt| dt on the grid (at least 3 points).
/// Each interval takes the larger of the trapezoid of |jvp derivative| and
/// the chord |mu(t_k+1) - mu(t_k)|, which the exact interval arc length can
/// never fall below.
double arc_length(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space);

/// Trapezoid estimate of int_0^1 d mu/dt dt using jvp derivatives.
double path_integral(const Mlp& model, const PairedBatch& pair, std::span<const double> t_grid, MixSpace space);

struct PenaltyOptions {
  MixSpace space = MixSpace::kInput;
  double h = 0.1;
  PenaltyForm form = PenaltyForm::kAbs;
};

/// Fair-mixup penalty at one mixing coefficient t: for each paired batch the
/// central difference (mu(t+h) - mu(t-h)) / 2h is built from forward passes on
/// the tape, then |.| or (.)^2 is applied and the terms are summed (one pair
/// for demographic parity, one pair per label for equalized odds).
/// Requires t in [h, 1-h].
Var fair_mixup_penalty(const BoundMlp& model, std::span<const PairedBatch> pairs, double t,
                       const PenaltyOptions& options);

/// |mean f(x0) - mean f(x1)| per paired batch, summed.
Var gap_penalty(const BoundMlp& model, std::span<const PairedBatch> pairs);

/// Samples the per-batch mixing coefficient uniformly from [h, 1-h].
double sample_mixing_t(Rng& rng, double h);

}  // namespace fairpath
