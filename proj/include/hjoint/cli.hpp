/*
 * Copyright 2026 The hjoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hjoint/model.hpp"
#include "hjoint/training.hpp"
#include "json.hpp"

namespace hjoint::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
};

// Everything `hjoint train` needs. Parsed from JSON; unknown keys are
// rejected and relative paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path domain_map;
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path checkpoint = "model.hjm";
  std::optional<std::filesystem::path> reports_dir;  // default: checkpoint's directory
  ModelConfig model;
  TrainConfig train;

  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  void validate() const;
};

// Runs one CLI invocation. `args` excludes the program name. Structured
// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace hjoint::cli
