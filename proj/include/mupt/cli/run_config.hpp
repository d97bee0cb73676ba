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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupt/exp/corpus.hpp"
#include "mupt/exp/hp_point.hpp"
#include "mupt/exp/masking.hpp"
#include "mupt/model/config.hpp"
#include "mupt/mup/param_groups.hpp"
#include "mupt/mup/width_scaler.hpp"

namespace mupt {

/// Everything one CLI invocation needs. Keys mirror the JSON config file.
struct RunConfig {
  // Model geometry. rank / channels / topics default to the base geometry scaled to `width`.
  std::size_t width = 64;
  std::optional<std::size_t> rank, channels, topics;
  std::size_t base_width = 64, base_rank = 16, base_channels = 2, base_topics = 32;
  std::size_t mfvi_iters = 6;
  std::size_t seq_len = 32;
  Paradigm paradigm = Paradigm::ScaleChannels;
  bool pos_bias = true;
  std::size_t pos_buckets = 32;

  HPPoint hp;

  // Data and training.
  std::string corpus = "synthetic:262144";
  TokenizerKind tokenizer = TokenizerKind::Byte;
  std::size_t word_vocab = 4096;
  double eval_fraction = 0.05;
  std::size_t eval_sequences = 64;
  std::size_t steps = 200;
  std::size_t batch_size = 4;
  std::size_t eval_interval = 100;
  std::size_t warmup_steps = 0;
  double mask_ratio = 0.15;
  MaskRule mask_rule = MaskRule::Bert;
  OutputLrVariant output_lr_variant = OutputLrVariant::Table2;
  std::uint64_t seed = 0;

  // Diagnostics.
  std::vector<std::size_t> widths = {64, 128, 256, 512};
  std::size_t coord_steps = 10;
  std::size_t coord_draws = 8;
  std::vector<std::size_t> scan_widths = {64, 128, 256, 512, 1024};
  std::size_t scan_seeds = 20;
  std::size_t equivalence_seeds = 5;
  double equivalence_tol = 1e-9;
  std::vector<std::size_t> energy_widths = {512, 1024, 2048, 4096};
  std::size_t energy_seeds = 8;
  std::size_t energy_steps = 0;  // 0: init stage

  // Experiments.
  std::vector<std::size_t> sweep_widths = {64, 256};
  std::vector<double> lr_grid;  // empty: 5 half-decade points centred on eta
  double p = 0.05;
  double alpha = 0.05;
  double halfwidth = 0.2;
  std::size_t max_runs = 0;  // 0: unlimited

  // Operational, excluded from the hash.
  std::string out_dir;
  std::size_t threads = 1;

  void validate() const;
  WidthScaler scaler(std::size_t vocab_size) const;
  /// Geometry at `width` (rank/channels/topics overrides applied only at the configured width).
  PTConfig model_config(std::size_t vocab_size) const;
};

nlohmann::json to_json(const RunConfig& c);
/// Defaults overlaid with `j`; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig parse_config(const std::string& path);
/// Applies "key=value"; the value is parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& j, const std::string& assignment);
/// FNV-1a 64 over the canonical JSON of every semantically relevant field, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace mupt
