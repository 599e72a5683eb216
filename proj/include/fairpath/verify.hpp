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

// Seeded self-check suite: closed forms against the descent oracle, the
// path-integral identity, the arc-length bound and fd/jvp agreement.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairpath {

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Fixes lambda1 for every closed-form instance instead of sampling it.
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  /// Replaces every check's tolerance.
  std::optional<double> tolerance;
};

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  /// "max_error" passes when measured <= tolerance, "min_margin" when
  /// measured >= -tolerance.
  std::string kind = "max_error";
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

VerifyReport run_verify(const VerifyOptions& options);

}  // namespace fairpath
