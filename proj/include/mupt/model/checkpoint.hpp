// Copyright 2026 The mupt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <filesystem>

#include <json.hpp>

#include "mupt/model/config.hpp"
#include "mupt/model/params.hpp"

namespace mupt {

// Container layout:
//   [0, 8)      magic "MUPTCKPT"
//   [8, 16)     header length H, uint64 little-endian
//   [16, 16+H)  JSON header: format_version, config, extra, tensor index
//               (name, group, shape, offset, nbytes, dtype)
//   [16+H, ..)  raw little-endian float64 payloads in index order;
//               `offset` is relative to the start of this section
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  PTConfig config;
  ModelParams params;
  nlohmann::json extra = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws FormatError (with the byte offset) on corruption or version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mupt
