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

#include <optional>
#include <vector>

#include "mupt/diag/report.hpp"
#include "mupt/exp/train.hpp"
#include "mupt/mup/width_scaler.hpp"

namespace mupt {

struct CoordCheckOptions {
  std::size_t steps = 10;
  std::size_t init_draws = 8;  // independent initialisations averaged per width
  HPPoint hp;  // eta may be 0 here
  std::size_t batch_size = 4;
  std::size_t probe_sequences = 4;
  double mask_ratio = 0.15;
  MaskRule mask_rule = MaskRule::Bert;
  OutputLrVariant output_lr_variant = OutputLrVariant::Table2;
  std::optional<std::size_t> hidden_lr_width;  // fixed Hidden LR eta / hidden_lr_width (control)
  AdamWConstants adam;
  InitOptions init;
  std::uint64_t seed = 0;
};

// Probe names recorded at every step.
// attn_centered: attention logits minus their off-diagonal row mean.
inline const std::vector<std::string> kActivationProbes = {"nz",       "attn_logits",  "attn_centered",
                                                           "z_logits", "topic_logits", "out_logits"};
inline const std::vector<std::string> kDeltaProbes = {"delta_nz", "delta_attn_logits", "delta_z_logits",
                                                      "delta_out_logits"};

/// Trains `steps` AdamW steps at each width on the same batches and records the
/// mean-abs and variance of every probe on a fixed probe set after each step,
/// averaged over `init_draws` initialisations. Delta probes are differences from
/// the step-0 activations.
CoordReport coord_check(const WidthScaler& scaler, const std::vector<std::size_t>& widths, const TrainData& data,
                        const CoordCheckOptions& options);

struct VarianceScan {
  std::vector<std::size_t> widths;
  std::vector<double> variances;  // mean over seeds of Var(output logits)
  LogLogFit fit;
};

/// Output-logit variance at init against width. `control_sigma` > 0 replaces the
/// Output init sigma by that constant.
VarianceScan logit_variance_scan(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                 std::size_t seeds_per_width, double control_sigma = -1.0, std::size_t seq_len = 16,
                                 std::uint64_t seed = 0);

struct UpdateMagnitude {
  std::vector<std::size_t> widths;
  std::vector<double> delta;  // mean |delta N Q_z| after one step
  double max_consecutive_ratio = 1.0;  // max over neighbours of max(r, 1/r)
  double first_last_ratio = 1.0;
};

UpdateMagnitude update_magnitude_check(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                       const TrainData& data, const CoordCheckOptions& options);

/// coord_check and update_magnitude_check under μP and under the control with the
/// Hidden LR frozen at eta / widths.front(), plus the band assertions:
///   mup_activation_band, mup_delta_band: nz, attn_logits, z_logits and their deltas
///     within [lo, hi] between neighbours at every step;
///   control_violates_band: the control's deltas leave the band somewhere;
///   attn_variance_init_non_increasing: step-0 attn_centered variance never grows by > hi;
///   update_magnitude_mup / update_magnitude_control: max neighbour ratio <= hi, and
///     the control's first-to-last ratio >= 2.
struct CoordSuite {
  CoordReport mup, control;
  UpdateMagnitude update_mup, update_control;
  std::vector<Assertion> assertions;
  bool passed() const;
};

CoordSuite run_coord_suite(const WidthScaler& scaler, const std::vector<std::size_t>& widths, const TrainData& data,
                           const CoordCheckOptions& options, double lo = 1.0 / 3.0, double hi = 3.0);

}  // namespace mupt
