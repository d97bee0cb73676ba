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

#include <ostream>
#include <string>
#include <vector>

#include "mupt/cli/run_config.hpp"

namespace mupt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // usage, config or I/O error
inline constexpr int kExitAssertion = 2;  // a checked scientific property failed

struct CommandContext {
  std::string input;  // plot: CSV to render
  std::ostream* log = nullptr;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Artifacts go to cfg.out_dir with the config hash in
/// every filename. Contract and format errors propagate to the caller.
int run_command(const std::string& name, const RunConfig& cfg, const CommandContext& ctx);

}  // namespace mupt
