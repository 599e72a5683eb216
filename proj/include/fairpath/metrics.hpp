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

// Group-fairness and ranking metrics over prediction scores.
//
//   delta_dp  = |E[f | a=0] - E[f | a=1]|                       in [0, 1]
//   delta_eo  = sum_y |E[f | a=0, y] - E[f | a=1, y]|            in [0, 2]
//
// The thresholded variants binarize f at every threshold t (f >= t) and
// average the resulting gaps.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace fairpath {

class EmptyGroupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scores with their labels and sensitive attribute, row-aligned.
class GroupedScores {
 public:
  GroupedScores(std::vector<double> scores, std::vector<int> labels, std::vector<int> groups);

  /// Labels default to 0; convenient for DP-only use.
  static GroupedScores from_groups(std::span<const double> group0, std::span<const double> group1);

  std::span<const double> scores() const { return scores_; }
  std::span<const int> labels() const { return labels_; }
  std::span<const int> groups() const { return groups_; }
  std::size_t size() const { return scores_.size(); }

  /// Same rows, scores replaced by 1(score >= threshold).
  GroupedScores binarized(double threshold) const;

 private:
  std::vector<double> scores_;
  std::vector<int> labels_;
  std::vector<int> groups_;
};

class ThresholdSet {
 public:
  /// Thresholds must lie in (0, 1) and be strictly increasing.
  explicit ThresholdSet(std::vector<double> thresholds);
  /// {0.1, 0.2, ..., 0.9}.
  static ThresholdSet deciles();

  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

double delta_dp(const GroupedScores& grouped);
double delta_eo(const GroupedScores& grouped);
double mean_thresholded_dp(const GroupedScores& grouped, const ThresholdSet& thresholds);
double mean_thresholded_eo(const GroupedScores& grouped, const ThresholdSet& thresholds);

/// Non-interpolated AP: mean of precision@k over the ranks k of positives,
/// ranking by descending score with ties kept in original index order.
double average_precision(std::span<const double> scores, std::span<const int> labels);

}  // namespace fairpath
