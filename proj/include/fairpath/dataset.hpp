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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fairpath/metrics.hpp"
#include "fairpath/mixup.hpp"
#include "fairpath/rng.hpp"
#include "fairpath/tensor.hpp"

namespace fairpath {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Features, binary labels and binary sensitive attribute, row-aligned.
struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<int> a;
  std::vector<std::string> feature_names;
  std::string provenance;

  std::size_t size() const { return y.size(); }
  int dim() const { return static_cast<int>(x.cols()); }

  /// Throws DataError unless n is consistent, values are finite and both
  /// groups and both labels are present.
  void validate() const;
  /// True when every (a, y) cell is non-empty.
  bool has_all_cells() const;
  /// Row counts indexed [a][y].
  std::array<std::array<std::size_t, 2>, 2> cell_counts() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  /// Rows with a == group (and y == label when label >= 0).
  std::vector<std::size_t> rows_where(int group, int label = -1) const;
  Matrix rows_of(std::span<const std::size_t> rows) const;

  GroupedScores grouped(const Matrix& scores) const;

  /// CSV with a header row: features..., label, sensitive.
  void write_csv(std::ostream& out) const;
};

/// Gaussian two-group benchmark. Cell (a, y) holds samples with mean
/// y * label_shift * e1 + a * group_shift * e2 and unit covariance.
/// label_group_corr = rho in [0, 1) resizes the cells to
/// round(n_per_cell * (1 + rho)) when y == a and round(n_per_cell * (1 - rho))
/// otherwise, which correlates the label with the group; rho = 0 gives equal
/// cells.
Dataset synth_two_group(std::uint64_t seed, int n_per_cell, double group_shift, double label_shift, int dim,
                        double label_group_corr = 0.0);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  static SplitSpec parse(const std::string& text, std::uint64_t seed);
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_rows, val_rows, test_rows;
};

/// Seeded uniform shuffle into train/val/test; reshuffles (up to 100 times)
/// until every split contains all four (a, y) cells.
Splits split(const Dataset& dataset, const SplitSpec& spec);

enum class Constraint { kDp, kEo };
std::string to_string(Constraint c);
Constraint parse_constraint(const std::string& text);

/// One group-balanced batch. Rows are laid out cell by cell: for DP
/// [a=0 | a=1]; for EO [(0,0) | (1,0) | (0,1) | (1,1)] as (a, y).
struct BalancedBatch {
  Matrix x;
  std::vector<int> y;
  std::vector<int> a;
  /// One pair for DP; pairs[y] couples (a=0, y) with (a=1, y) for EO.
  std::vector<PairedBatch> pairs;
  /// Row offset and count of each cell block within x.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  bool sampled_with_replacement = false;
};

/// Endless stream of balanced batches. Each cell keeps its own shuffled
/// queue and reshuffles when exhausted; an epoch is the number of batches
/// needed for the largest cell to be drawn once.
class BalancedBatchStream {
 public:
  BalancedBatchStream(const Dataset& dataset, Constraint constraint, int batch_size, std::uint64_t seed);

  BalancedBatch next();
  int batches_per_epoch() const { return batches_per_epoch_; }
  int per_cell_quota() const { return quota_; }
  /// True if some cell is smaller than its quota and is drawn with replacement.
  bool with_replacement() const { return with_replacement_; }
  /// Dataset row indices of each cell, in cell order.
  const std::vector<std::vector<std::size_t>>& cells() const { return cells_; }
  /// Dataset rows of the most recent batch, in batch order.
  const std::vector<std::size_t>& last_rows() const { return last_rows_; }

 private:
  std::vector<std::size_t> draw(std::size_t cell);

  const Dataset* dataset_;
  Constraint constraint_;
  int quota_;
  int batches_per_epoch_ = 0;
  bool with_replacement_ = false;
  Rng rng_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<std::vector<std::size_t>> queues_;
  std::vector<std::size_t> cursors_;
  std::vector<std::size_t> last_rows_;
};

/// Loads the UCI Adult files (adult.data and adult.test layout). Rows with a
/// '?' field are dropped. Label = income >50K, sensitive attribute = Male;
/// sex, fnlwgt are not features. Categorical columns are one-hot encoded;
/// age, education-num, capital-gain, capital-loss and hours-per-week are cut
/// into 10 equal-width bins (edges from the adult.data rows) and one-hot
/// encoded.
Dataset load_adult(const std::filesystem::path& data_path, const std::filesystem::path& test_path);

}  // namespace fairpath
