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

#include "fairpath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fairpath {
namespace {

bool is_binary(int v) { return v == 0 || v == 1; }

// Mean score over rows with groups == a (and labels == y when y >= 0).
// Neumaier-compensated sum, so equal true means compare equal in the common
// cases (e.g. ten copies of 0.6 against six ones and four zeros).
double cell_mean(const GroupedScores& g, int a, int y) {
  double total = 0.0, compensation = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.groups()[i] != a) continue;
    if (y >= 0 && g.labels()[i] != y) continue;
    const double v = g.scores()[i];
    const double next = total + v;
    compensation += std::abs(total) >= std::abs(v) ? (total - next) + v : (v - next) + total;
    total = next;
    ++count;
  }
  if (count == 0) {
    throw EmptyGroupError("empty cell: a=" + std::to_string(a) + (y >= 0 ? ", y=" + std::to_string(y) : ""));
  }
  return (total + compensation) / static_cast<double>(count);
}

}  // namespace

GroupedScores::GroupedScores(std::vector<double> scores, std::vector<int> labels, std::vector<int> groups)
    : scores_(std::move(scores)), labels_(std::move(labels)), groups_(std::move(groups)) {
  if (labels_.size() != scores_.size() || groups_.size() != scores_.size()) {
    throw std::invalid_argument("GroupedScores: scores, labels and groups must have equal length");
  }
  if (!std::all_of(labels_.begin(), labels_.end(), is_binary) ||
      !std::all_of(groups_.begin(), groups_.end(), is_binary)) {
    throw std::invalid_argument("GroupedScores: labels and groups must be 0/1");
  }
}

GroupedScores GroupedScores::from_groups(std::span<const double> group0, std::span<const double> group1) {
  std::vector<double> scores(group0.begin(), group0.end());
  scores.insert(scores.end(), group1.begin(), group1.end());
  std::vector<int> groups(group0.size(), 0);
  groups.resize(scores.size(), 1);
  std::vector<int> labels(scores.size(), 0);
  return GroupedScores(std::move(scores), std::move(labels), std::move(groups));
}

GroupedScores GroupedScores::binarized(double threshold) const {
  std::vector<double> bin(scores_.size());
  std::transform(scores_.begin(), scores_.end(), bin.begin(),
                 [threshold](double s) { return s >= threshold ? 1.0 : 0.0; });
  return GroupedScores(std::move(bin), labels_, groups_);
}

ThresholdSet::ThresholdSet(std::vector<double> thresholds) : values_(std::move(thresholds)) {
  if (values_.empty()) throw std::invalid_argument("ThresholdSet: empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] < 1.0)) throw std::invalid_argument("ThresholdSet: thresholds must lie in (0,1)");
    if (i > 0 && !(values_[i] > values_[i - 1])) throw std::invalid_argument("ThresholdSet: must be strictly increasing");
  }
}

ThresholdSet ThresholdSet::deciles() {
  std::vector<double> t;
  for (int i = 1; i <= 9; ++i) t.push_back(i / 10.0);
  return ThresholdSet(std::move(t));
}

double delta_dp(const GroupedScores& grouped) {
  return std::abs(cell_mean(grouped, 0, -1) - cell_mean(grouped, 1, -1));
}

double delta_eo(const GroupedScores& grouped) {
  double gap = 0.0;
  for (int y = 0; y <= 1; ++y) gap += std::abs(cell_mean(grouped, 0, y) - cell_mean(grouped, 1, y));
  return gap;
}

double mean_thresholded_dp(const GroupedScores& grouped, const ThresholdSet& thresholds) {
  double total = 0.0;
  for (double t : thresholds.values()) total += delta_dp(grouped.binarized(t));
  return total / static_cast<double>(thresholds.values().size());
}

double mean_thresholded_eo(const GroupedScores& grouped, const ThresholdSet& thresholds) {
  double total = 0.0;
  for (double t : thresholds.values()) total += delta_eo(grouped.binarized(t));
  return total / static_cast<double>(thresholds.values().size());
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("average_precision: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });

  double sum_precision = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++hits;
      sum_precision += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average_precision: no positive labels");
  return sum_precision / static_cast<double>(hits);
}

}  // namespace fairpath
