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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairpath/dataset.hpp"

using namespace fairpath;

namespace fs = std::filesystem;

namespace {

const fs::path kAdultDir = fs::path(FAIRPATH_SOURCE_DIR) / "data" / "adult";

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path path = fs::temp_directory_path() / ("fairpath_test_" + name);
  std::ofstream(path) << contents;
  return path;
}

const char* kAdultLine =
    "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, "
    "United-States, <=50K\n";
const char* kAdultLine2 =
    "50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Female, 0, 0, "
    "13, United-States, >50K\n";

}  // namespace

TEST_CASE("synth_two_group is deterministic with the requested cells") {
  const Dataset a = synth_two_group(3, 100, 1.0, 2.0, 5);
  const Dataset b = synth_two_group(3, 100, 1.0, 2.0, 5);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x != synth_two_group(4, 100, 1.0, 2.0, 5).x);
  CHECK(a.size() == 400);
  CHECK(a.dim() == 5);
  for (const auto& row : a.cell_counts()) {
    for (std::size_t c : row) CHECK(c == 100);
  }
  CHECK_NOTHROW(a.validate());

  const Dataset corr = synth_two_group(3, 100, 1.0, 2.0, 5, 0.5);
  const auto counts = corr.cell_counts();
  CHECK(counts[0][0] == 150);
  CHECK(counts[1][1] == 150);
  CHECK(counts[0][1] == 50);
  CHECK(counts[1][0] == 50);
  CHECK_THROWS(synth_two_group(0, 0, 1.0, 2.0, 5));
  CHECK_THROWS(synth_two_group(0, 10, 1.0, 2.0, 5, 1.0));
}

TEST_CASE("synth_two_group shifts the label and group coordinates") {
  const Dataset ds = synth_two_group(11, 4000, 1.0, 2.0, 3);
  double sum[2][2] = {{0, 0}, {0, 0}};
  double count[2] = {0, 0};
  double group_sum[2] = {0, 0};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sum[ds.y[i]][0] += ds.x(static_cast<Eigen::Index>(i), 0);
    count[ds.y[i]] += 1;
    group_sum[ds.a[i]] += ds.x(static_cast<Eigen::Index>(i), 1);
  }
  CHECK(sum[1][0] / count[1] - sum[0][0] / count[0] == doctest::Approx(2.0).epsilon(0.03));
  CHECK((group_sum[1] - group_sum[0]) / 8000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("split partitions the rows 60/20/20") {
  const Dataset ds = synth_two_group(1, 250, 1.0, 2.0, 4);
  const Splits s = split(ds, SplitSpec{0.6, 0.2, 0.2, 9});
  CHECK(s.train.size() == 600);
  CHECK(s.val.size() == 200);
  CHECK(s.test.size() == 200);
  std::set<std::size_t> all(s.train_rows.begin(), s.train_rows.end());
  all.insert(s.val_rows.begin(), s.val_rows.end());
  all.insert(s.test_rows.begin(), s.test_rows.end());
  CHECK(all.size() == 1000);
  CHECK(s.train.x.row(0) == ds.x.row(static_cast<Eigen::Index>(s.train_rows[0])));

  const Splits again = split(ds, SplitSpec{0.6, 0.2, 0.2, 9});
  CHECK(again.test_rows == s.test_rows);
  CHECK(split(ds, SplitSpec{0.6, 0.2, 0.2, 10}).test_rows != s.test_rows);
}

TEST_CASE("split specs parse and validate") {
  const SplitSpec three = SplitSpec::parse("0.7,0.1,0.2", 5);
  CHECK(three.train == 0.7);
  CHECK(three.seed == 5);
  const SplitSpec two = SplitSpec::parse("0.8,0.2", 5);
  CHECK(two.val == 0.0);
  CHECK_THROWS(SplitSpec::parse("0.5,0.2,0.2", 0));
  CHECK_THROWS(SplitSpec::parse("0.5", 0));
  CHECK_THROWS(SplitSpec::parse("a,b", 0));

  const Dataset ds = synth_two_group(1, 50, 1.0, 2.0, 3);
  const Splits s = split(ds, two);
  CHECK(s.val_rows == s.train_rows);
  CHECK(s.test.size() == 40);
}

TEST_CASE("split rejects datasets too small for the fractions") {
  const Dataset ds = synth_two_group(1, 1, 1.0, 2.0, 2);
  CHECK_THROWS_AS(split(ds, SplitSpec{0.6, 0.2, 0.2, 0}), DataError);
}

TEST_CASE("balanced batches for DP and EO") {
  const Dataset ds = synth_two_group(2, 1000, 1.0, 2.0, 3);
  BalancedBatchStream dp(ds, Constraint::kDp, 1000, 4);
  const BalancedBatch b = dp.next();
  CHECK(b.x.rows() == 1000);
  REQUIRE(b.pairs.size() == 1);
  CHECK(b.pairs[0].size() == 500);
  CHECK(std::count(b.a.begin(), b.a.end(), 0) == 500);
  CHECK(b.blocks[1] == std::make_pair(Eigen::Index{500}, Eigen::Index{500}));
  CHECK_FALSE(b.sampled_with_replacement);

  BalancedBatchStream eo(ds, Constraint::kEo, 1000, 4);
  const BalancedBatch e = eo.next();
  REQUIRE(e.pairs.size() == 2);
  CHECK(e.blocks.size() == 4);
  for (const auto& [offset, count] : e.blocks) CHECK(count == 250);
  // Block order (a, y): (0,0), (1,0), (0,1), (1,1).
  for (std::size_t c = 0; c < 4; ++c) {
    const auto [offset, count] = e.blocks[c];
    for (Eigen::Index k = offset; k < offset + count; ++k) {
      CHECK(e.a[static_cast<std::size_t>(k)] == static_cast<int>(c % 2));
      CHECK(e.y[static_cast<std::size_t>(k)] == static_cast<int>(c / 2));
    }
  }
  CHECK(e.pairs[1].x0 == e.x.middleRows(500, 250));

  CHECK_THROWS(BalancedBatchStream(ds, Constraint::kEo, 1002, 0));
  CHECK_THROWS(BalancedBatchStream(ds, Constraint::kDp, 0, 0));
}

TEST_CASE("an epoch of balanced batches covers the largest cell") {
  const Dataset ds = synth_two_group(3, 300, 1.0, 2.0, 2, 0.5);  // two groups of 600
  BalancedBatchStream stream(ds, Constraint::kDp, 200, 8);
  CHECK(stream.batches_per_epoch() == 6);
  std::map<std::size_t, int> seen;
  for (int k = 0; k < stream.batches_per_epoch(); ++k) {
    stream.next();
    for (std::size_t r : stream.last_rows()) ++seen[r];
  }
  CHECK(seen.size() == ds.size());
  for (const auto& [row, times] : seen) CHECK(times == 1);

  BalancedBatchStream small(ds, Constraint::kEo, 800, 8);
  CHECK(small.with_replacement());
  CHECK(small.next().sampled_with_replacement);
}

TEST_CASE("balanced batches are deterministic in the seed") {
  const Dataset ds = synth_two_group(4, 100, 1.0, 2.0, 2);
  BalancedBatchStream a(ds, Constraint::kDp, 40, 1), b(ds, Constraint::kDp, 40, 1);
  for (int k = 0; k < 10; ++k) CHECK(a.next().x == b.next().x);
}

TEST_CASE("write_csv emits a header and full-precision rows") {
  Dataset ds;
  ds.x.resize(2, 2);
  ds.x << 0.1, -2.0, 1.0 / 3.0, 4.0;
  ds.y = {1, 0};
  ds.a = {0, 1};
  ds.feature_names = {"f0", "f1"};
  std::ostringstream out;
  ds.write_csv(out);
  std::istringstream in(out.str());
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "f0,f1,label,sensitive");
  CHECK(first == "0.10000000000000001,-2,1,0");
  CHECK(std::stod(second.substr(0, second.find(','))) == 1.0 / 3.0);
}

TEST_CASE("load_adult reads the UCI files") {
  if (!fs::exists(kAdultDir / "adult.data")) {
    MESSAGE("UCI Adult files not present; skipping");
    return;
  }
  const Dataset ds = load_adult(kAdultDir / "adult.data", kAdultDir / "adult.test");
  CHECK(ds.size() == 45222);
  CHECK(ds.dim() == static_cast<int>(ds.feature_names.size()));
  CHECK_NOTHROW(ds.validate());

  // Every one-hot block sums to one on every row.
  std::map<std::string, std::vector<Eigen::Index>> blocks;
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    const std::string& name = ds.feature_names[static_cast<std::size_t>(j)];
    blocks[name.substr(0, name.find('='))].push_back(j);
  }
  CHECK(blocks.count("fnlwgt") == 0);
  CHECK(blocks.count("sex") == 0);
  CHECK(blocks.count("income") == 0);
  CHECK(blocks.size() == 12);
  for (const auto& [column, cols] : blocks) {
    CAPTURE(column);
    bool ok = true;
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index j : cols) s += ds.x(i, j);
      ok = ok && s == 1.0;
    }
    CHECK(ok);
  }
  for (const std::string& name : ds.feature_names) CHECK(name.find('?') == std::string::npos);
  const auto counts = ds.cell_counts();
  CHECK(counts[0][0] + counts[0][1] < counts[1][0] + counts[1][1]);  // fewer women than men
}

TEST_CASE("load_adult handles markers and reports malformed lines") {
  const fs::path good = temp_file("good.data", std::string(kAdultLine) + kAdultLine2);
  const fs::path test = temp_file(
      "good.test", std::string("|1x3 Cross validator\n") +
                       "28, Private, 338409, Bachelors, 13, Married-civ-spouse, Prof-specialty, Wife, Black, Female, "
                       "0, 0, 40, Cuba, >50K.\n" +
                       "28, ?, 338409, Bachelors, 13, Married-civ-spouse, Prof-specialty, Wife, Black, Female, 0, 0, "
                       "40, Cuba, <=50K.\n\n");
  const Dataset ds = load_adult(good, test);
  CHECK(ds.size() == 3);
  CHECK(ds.y == std::vector<int>{0, 1, 1});
  CHECK(ds.a == std::vector<int>{1, 0, 0});

  const fs::path broken = temp_file("broken.data", std::string(kAdultLine) + "39, State-gov, 77516\n");
  try {
    load_adult(broken, test);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find(":2:") != std::string::npos);
    CHECK(what.find("found 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_adult(kAdultDir / "missing.data", test), DataError);
}
