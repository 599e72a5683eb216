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

#include "fairpath/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace fairpath {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

void Dataset::validate() const {
  const std::size_t n = y.size();
  if (a.size() != n || static_cast<std::size_t>(x.rows()) != n) {
    throw DataError("dataset: inconsistent row counts (x " + std::to_string(x.rows()) + ", y " + std::to_string(n) +
                    ", a " + std::to_string(a.size()) + ")");
  }
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(x.cols())) {
    throw DataError("dataset: feature-name list does not match the column count");
  }
  if (!all_finite(x)) throw DataError("dataset: non-finite feature value");
  bool label[2] = {false, false}, group[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    if ((y[i] != 0 && y[i] != 1) || (a[i] != 0 && a[i] != 1)) {
      throw DataError("dataset: row " + std::to_string(i) + " has a non-binary label or group");
    }
    label[y[i]] = true;
    group[a[i]] = true;
  }
  if (!label[0] || !label[1]) throw DataError("dataset: both labels must be present");
  if (!group[0] || !group[1]) throw DataError("dataset: both groups must be present");
}

std::array<std::array<std::size_t, 2>, 2> Dataset::cell_counts() const {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  for (std::size_t i = 0; i < size(); ++i) ++counts[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(y[i])];
  return counts;
}

bool Dataset::has_all_cells() const {
  const auto counts = cell_counts();
  return counts[0][0] > 0 && counts[0][1] > 0 && counts[1][0] > 0 && counts[1][1] > 0;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x = rows_of(rows);
  out.y.reserve(rows.size());
  out.a.reserve(rows.size());
  for (std::size_t r : rows) {
    out.y.push_back(y.at(r));
    out.a.push_back(a.at(r));
  }
  out.feature_names = feature_names;
  out.provenance = provenance;
  return out;
}

std::vector<std::size_t> Dataset::rows_where(int group, int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (a[i] == group && (label < 0 || y[i] == label)) out.push_back(i);
  }
  return out;
}

Matrix Dataset::rows_of(std::span<const std::size_t> rows) const {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) throw std::out_of_range("dataset: row index out of range");
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

GroupedScores Dataset::grouped(const Matrix& scores) const {
  if (scores.cols() != 1 || static_cast<std::size_t>(scores.rows()) != size()) {
    throw ShapeError("dataset: expected " + std::to_string(size()) + " x 1 scores, got " + shape_string(scores));
  }
  return GroupedScores(std::vector<double>(scores.data(), scores.data() + scores.size()), y, a);
}

void Dataset::write_csv(std::ostream& out) const {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out << (feature_names.empty() ? "x" + std::to_string(j) : feature_names[static_cast<std::size_t>(j)]) << ',';
  }
  out << "label,sensitive\n";
  for (std::size_t i = 0; i < size(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << format_double(x(static_cast<Eigen::Index>(i), j)) << ',';
    out << y[i] << ',' << a[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic two-group data

Dataset synth_two_group(std::uint64_t seed, int n_per_cell, double group_shift, double label_shift, int dim,
                        double label_group_corr) {
  if (n_per_cell < 1) throw std::invalid_argument("synth_two_group: n_per_cell must be >= 1");
  if (dim < 2) throw std::invalid_argument("synth_two_group: dim must be >= 2");
  if (!(label_group_corr >= 0.0 && label_group_corr < 1.0)) {
    throw std::invalid_argument("synth_two_group: label_group_corr must lie in [0, 1)");
  }
  std::array<std::array<long, 2>, 2> sizes{};
  for (int a = 0; a < 2; ++a) {
    for (int y = 0; y < 2; ++y) {
      const double factor = a == y ? 1.0 + label_group_corr : 1.0 - label_group_corr;
      sizes[a][y] = std::max(1L, std::lround(n_per_cell * factor));
    }
  }
  const long n = sizes[0][0] + sizes[0][1] + sizes[1][0] + sizes[1][1];

  Dataset out;
  out.x.resize(n, dim);
  out.y.reserve(static_cast<std::size_t>(n));
  out.a.reserve(static_cast<std::size_t>(n));
  Rng rng(derive_seed(seed, "synth-two-group"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index row = 0;
  for (int a = 0; a < 2; ++a) {
    for (int y = 0; y < 2; ++y) {
      for (long k = 0; k < sizes[a][y]; ++k, ++row) {
        for (int j = 0; j < dim; ++j) out.x(row, j) = normal(rng);
        out.x(row, 0) += y * label_shift;
        out.x(row, 1) += a * group_shift;
        out.y.push_back(y);
        out.a.push_back(a);
      }
    }
  }
  for (int j = 0; j < dim; ++j) out.feature_names.push_back("x" + std::to_string(j));
  out.provenance = "synth(seed=" + std::to_string(seed) + ", n_per_cell=" + std::to_string(n_per_cell) +
                   ", group_shift=" + format_double(group_shift) + ", label_shift=" + format_double(label_shift) +
                   ", dim=" + std::to_string(dim) + ", label_group_corr=" + format_double(label_group_corr) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  const bool two_way = val == 0.0;
  if (!(train > 0.0) || !(test > 0.0) || !(val > 0.0 || two_way)) {
    throw std::invalid_argument("split: fractions must be positive");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) throw std::invalid_argument("split: fractions must sum to 1");
}

SplitSpec SplitSpec::parse(const std::string& text, std::uint64_t seed) {
  std::vector<double> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("split: cannot parse fraction '" + item + "'");
    }
  }
  SplitSpec spec;
  spec.seed = seed;
  if (parts.size() == 3) {
    spec.train = parts[0];
    spec.val = parts[1];
    spec.test = parts[2];
  } else if (parts.size() == 2) {
    spec.train = parts[0];
    spec.val = 0.0;
    spec.test = parts[1];
  } else {
    throw std::invalid_argument("split: expected 'train,val,test' or 'train,test', got '" + text + "'");
  }
  spec.validate();
  return spec;
}

Splits split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  dataset.validate();
  const std::size_t n = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.val));
  if (n_train == 0 || n_train + n_val >= n || (spec.val > 0.0 && n_val == 0)) {
    throw DataError("split: " + std::to_string(n) + " rows are too few for the requested fractions");
  }

  std::vector<std::size_t> order(n);
  Rng rng(derive_seed(spec.seed, "split"));
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    Splits out;
    out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    out.train = dataset.subset(out.train_rows);
    out.test = dataset.subset(out.test_rows);
    if (n_val == 0) {
      // Two-way split: model selection falls back to the training rows.
      out.val_rows = out.train_rows;
      out.val = out.train;
    } else {
      out.val = dataset.subset(out.val_rows);
    }
    if (out.train.has_all_cells() && out.val.has_all_cells() && out.test.has_all_cells()) return out;
  }
  throw DataError("split: no shuffle in 100 attempts kept all four (a, y) cells in every split");
}

// ---------------------------------------------------------------------------
// Balanced batches

std::string to_string(Constraint c) { return c == Constraint::kDp ? "dp" : "eo"; }

Constraint parse_constraint(const std::string& text) {
  if (text == "dp") return Constraint::kDp;
  if (text == "eo") return Constraint::kEo;
  throw std::invalid_argument("unknown constraint '" + text + "' (expected dp|eo)");
}

BalancedBatchStream::BalancedBatchStream(const Dataset& dataset, Constraint constraint, int batch_size,
                                         std::uint64_t seed)
    : dataset_(&dataset), constraint_(constraint), rng_(derive_seed(seed, "balanced-batches")) {
  const int parts = constraint == Constraint::kDp ? 2 : 4;
  if (batch_size < parts || batch_size % parts != 0) {
    throw std::invalid_argument("balanced batches: batch size " + std::to_string(batch_size) +
                                " must be a positive multiple of " + std::to_string(parts));
  }
  quota_ = batch_size / parts;
  if (constraint == Constraint::kDp) {
    cells_ = {dataset.rows_where(0), dataset.rows_where(1)};
  } else {
    cells_ = {dataset.rows_where(0, 0), dataset.rows_where(1, 0), dataset.rows_where(0, 1), dataset.rows_where(1, 1)};
  }
  std::size_t largest = 0;
  for (const auto& cell : cells_) {
    if (cell.empty()) throw DataError("balanced batches: a required cell is empty");
    if (cell.size() < static_cast<std::size_t>(quota_)) with_replacement_ = true;
    largest = std::max(largest, cell.size());
  }
  batches_per_epoch_ = static_cast<int>((largest + static_cast<std::size_t>(quota_) - 1) / static_cast<std::size_t>(quota_));
  queues_ = cells_;
  cursors_.assign(cells_.size(), 0);
  for (auto& q : queues_) std::shuffle(q.begin(), q.end(), rng_);
}

std::vector<std::size_t> BalancedBatchStream::draw(std::size_t cell) {
  std::vector<std::size_t> rows;
  rows.reserve(static_cast<std::size_t>(quota_));
  auto& queue = queues_[cell];
  if (queue.size() < static_cast<std::size_t>(quota_)) {
    std::uniform_int_distribution<std::size_t> pick(0, queue.size() - 1);
    for (int k = 0; k < quota_; ++k) rows.push_back(queue[pick(rng_)]);
    return rows;
  }
  while (rows.size() < static_cast<std::size_t>(quota_)) {
    if (cursors_[cell] == queue.size()) {
      std::shuffle(queue.begin(), queue.end(), rng_);
      cursors_[cell] = 0;
    }
    rows.push_back(queue[cursors_[cell]++]);
  }
  return rows;
}

BalancedBatch BalancedBatchStream::next() {
  BalancedBatch batch;
  batch.sampled_with_replacement = with_replacement_;
  last_rows_.clear();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto rows = draw(c);
    batch.blocks.emplace_back(static_cast<Eigen::Index>(last_rows_.size()), static_cast<Eigen::Index>(rows.size()));
    last_rows_.insert(last_rows_.end(), rows.begin(), rows.end());
  }
  batch.x = dataset_->rows_of(last_rows_);
  for (std::size_t r : last_rows_) {
    batch.y.push_back(dataset_->y[r]);
    batch.a.push_back(dataset_->a[r]);
  }
  auto block = [&](std::size_t c) -> Matrix {
    return batch.x.middleRows(batch.blocks[c].first, batch.blocks[c].second);
  };
  if (constraint_ == Constraint::kDp) {
    batch.pairs.push_back(PairedBatch{block(0), block(1), {}});
  } else {
    batch.pairs.push_back(PairedBatch{block(0), block(1), {}});
    batch.pairs.push_back(PairedBatch{block(2), block(3), {}});
  }
  return batch;
}

// ---------------------------------------------------------------------------
// UCI Adult

namespace {

constexpr std::size_t kAdultFields = 15;
constexpr int kBins = 10;

enum class Column { kDrop, kCategorical, kBinned, kSex, kIncome };

struct AdultColumn {
  const char* name;
  Column role;
};

constexpr AdultColumn kAdultColumns[kAdultFields] = {
    {"age", Column::kBinned},          {"workclass", Column::kCategorical},
    {"fnlwgt", Column::kDrop},         {"education", Column::kCategorical},
    {"education-num", Column::kBinned}, {"marital-status", Column::kCategorical},
    {"occupation", Column::kCategorical}, {"relationship", Column::kCategorical},
    {"race", Column::kCategorical},    {"sex", Column::kSex},
    {"capital-gain", Column::kBinned}, {"capital-loss", Column::kBinned},
    {"hours-per-week", Column::kBinned}, {"native-country", Column::kCategorical},
    {"income", Column::kIncome},
};

struct AdultRow {
  std::array<std::string, kAdultFields> fields;
  int label = 0;
  int male = 0;
};

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(where + ": cannot parse number '" + text + "'");
  }
  return v;
}

// Appends the complete rows of one file; rows with '?' are skipped.
void read_adult_file(const std::filesystem::path& path, std::vector<AdultRow>& rows, std::size_t& dropped) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '|') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    std::vector<std::string> fields;
    std::stringstream stream(stripped);
    std::string item;
    while (std::getline(stream, item, ',')) fields.push_back(trim(item));
    if (stripped.back() == ',') fields.emplace_back();
    if (fields.size() != kAdultFields) {
      throw DataError(where + ": expected " + std::to_string(kAdultFields) + " comma-separated fields, found " +
                      std::to_string(fields.size()));
    }
    AdultRow row;
    std::move(fields.begin(), fields.end(), row.fields.begin());
    if (std::any_of(row.fields.begin(), row.fields.end(), [](const std::string& f) { return f == "?"; })) {
      ++dropped;
      continue;
    }
    std::string income = row.fields[14];
    if (!income.empty() && income.back() == '.') income.pop_back();
    if (income == ">50K") {
      row.label = 1;
    } else if (income != "<=50K") {
      throw DataError(where + ": unexpected income value '" + row.fields[14] + "'");
    }
    if (row.fields[9] == "Male") {
      row.male = 1;
    } else if (row.fields[9] != "Female") {
      throw DataError(where + ": unexpected sex value '" + row.fields[9] + "'");
    }
    for (std::size_t c = 0; c < kAdultFields; ++c) {
      if (kAdultColumns[c].role == Column::kBinned) parse_number(row.fields[c], where);
      if (row.fields[c].empty() && kAdultColumns[c].role != Column::kDrop) throw DataError(where + ": empty field");
    }
    rows.push_back(std::move(row));
  }
}

}  // namespace

Dataset load_adult(const std::filesystem::path& data_path, const std::filesystem::path& test_path) {
  std::vector<AdultRow> rows;
  std::size_t dropped = 0;
  read_adult_file(data_path, rows, dropped);
  const std::size_t n_data = rows.size();
  read_adult_file(test_path, rows, dropped);
  if (n_data == 0 || rows.size() == n_data) throw DataError("load_adult: a file contained no usable rows");

  // Column blocks in file order. Bin edges come from the adult.data rows.
  struct Block {
    std::size_t column;
    std::vector<std::string> categories;  // categorical
    double lo = 0.0, hi = 0.0;            // binned
  };
  std::vector<Block> blocks;
  for (std::size_t c = 0; c < kAdultFields; ++c) {
    const Column role = kAdultColumns[c].role;
    if (role == Column::kCategorical) {
      std::set<std::string> seen;
      for (const auto& r : rows) seen.insert(r.fields[c]);
      blocks.push_back({c, {seen.begin(), seen.end()}});
    } else if (role == Column::kBinned) {
      Block b{c, {}};
      b.lo = b.hi = parse_number(rows[0].fields[c], "adult");
      for (std::size_t i = 0; i < n_data; ++i) {
        const double v = parse_number(rows[i].fields[c], "adult");
        b.lo = std::min(b.lo, v);
        b.hi = std::max(b.hi, v);
      }
      blocks.push_back(b);
    }
  }

  Dataset out;
  std::vector<std::size_t> offsets;
  for (const auto& b : blocks) {
    offsets.push_back(out.feature_names.size());
    const std::string name = kAdultColumns[b.column].name;
    if (kAdultColumns[b.column].role == Column::kCategorical) {
      for (const auto& cat : b.categories) out.feature_names.push_back(name + "=" + cat);
    } else {
      for (int k = 0; k < kBins; ++k) out.feature_names.push_back(name + "=bin" + std::to_string(k));
    }
  }

  out.x = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      std::size_t slot = 0;
      if (kAdultColumns[b.column].role == Column::kCategorical) {
        slot = static_cast<std::size_t>(
            std::lower_bound(b.categories.begin(), b.categories.end(), r.fields[b.column]) - b.categories.begin());
      } else {
        const double v = parse_number(r.fields[b.column], "adult");
        const double width = (b.hi - b.lo) / kBins;
        const long bin = width > 0.0 ? static_cast<long>(std::floor((v - b.lo) / width)) : 0;
        slot = static_cast<std::size_t>(std::clamp(bin, 0L, static_cast<long>(kBins - 1)));
      }
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(offsets[k] + slot)) = 1.0;
    }
    out.y.push_back(r.label);
    out.a.push_back(r.male);
  }
  out.provenance = "adult(" + data_path.filename().string() + "+" + test_path.filename().string() +
                   ", rows=" + std::to_string(rows.size()) + ", dropped=" + std::to_string(dropped) + ")";
  out.validate();
  return out;
}

}  // namespace fairpath
