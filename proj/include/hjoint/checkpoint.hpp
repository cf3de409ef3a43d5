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

#include "hjoint/model.hpp"
#include "json.hpp"

namespace hjoint {

inline constexpr int kCheckpointVersion = 1;

// HJM1 layout, little-endian: "HJM1", u32 header length, UTF-8 JSON header,
// then every tensor as raw f32 in the order the header's "tensors" list
// declares. Values are stored at single precision.
void write_checkpoint(std::ostream& out, const JointModel& model);
void save_checkpoint(const std::filesystem::path& path, const JointModel& model);

JointModel read_checkpoint(std::istream& in);
JointModel load_checkpoint(const std::filesystem::path& path);

// The JSON header write_checkpoint would emit.
nlohmann::json checkpoint_header(const JointModel& model);

}  // namespace hjoint
