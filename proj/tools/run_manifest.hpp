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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairpath::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::string started_at;  // UTC, ISO 8601
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
};

std::string utc_timestamp();

}  // namespace fairpath::cli
