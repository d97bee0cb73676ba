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


#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mupt/cli/commands.hpp"
#include "mupt/cli/run_config.hpp"
#include "mupt/core/error.hpp"

int main(int argc, char** argv) {
  using namespace mupt;
  CLI::App app{"mupt: width-scaled probabilistic transformer experiments"};
  std::string command, config_path, out_dir, input;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("command", command, "subcommand")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--set", overrides, "override a config key (key=value), repeatable");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--out-dir", out_dir, "artifact directory (default $MUPT_OUT_DIR or ./out)");
  auto* threads_opt = app.add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_option("--input", input, "CSV to render (plot)");
  app.footer("commands: train coord-check init-stats equivalence-check energy-probe transfer-sweep verify-local-opt plot\n"
             "exit codes: 0 success, 1 usage or config error, 2 checked property failed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ContractError("cannot open config: " + config_path);
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw ContractError("malformed config " + config_path + " (" + e.what() + ")");
      }
    }
    if (!j.is_object()) throw ContractError("config must be a JSON object");
    for (const auto& o : overrides) apply_override(j, o);
    if (*seed_opt) j["seed"] = seed;
    if (*threads_opt) j["threads"] = threads;
    if (!out_dir.empty()) {
      j["out_dir"] = out_dir;
    } else if (!j.contains("out_dir")) {
      if (const char* env = std::getenv("MUPT_OUT_DIR"); env && *env) j["out_dir"] = env;
    }
    cfg = config_from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    return run_command(command, cfg, CommandContext{input, &std::cout});
  } catch (const NumericError& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
