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

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupt/diag/report.hpp"
#include "mupt/exp/train.hpp"
#include "mupt/model/mfvi.hpp"
#include "mupt/mup/width_scaler.hpp"

namespace mupt {

/// Per-token means of the tempered energy terms and the tau-scaled Q_z entropy,
/// each with its sign: unary tau S, binary tau M B, ternary tau N T.
struct EnergyTerms {
  double e_unary = 0.0;
  double e_binary = 0.0;
  double e_ternary = 0.0;
  double tau_entropy = 0.0;
};

/// Per-token energy terms of one sequence (magnitudes of -E contributions).
std::vector<EnergyTerms> energy_terms(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                                      const PTConfig& config);

/// Uniform posteriors: Q_z = 1/N, Q_h = 1/(n-1) off the diagonal, Q_g = 1/M.
MFVIState uniform_state(std::size_t n, const PTConfig& config);

struct MagnitudeSeries {
  std::string quantity;
  std::vector<std::size_t> widths;
  std::vector<double> magnitudes;
  LogLogFit fit;
  bool skipped = false;
};

struct EnergyProbe {
  Paradigm paradigm = Paradigm::ScaleChannels;
  std::size_t trained_steps = 0;  // 0 is the init stage
  std::vector<MagnitudeSeries> series;  // e_unary, e_binary, e_ternary, tau_entropy
  double entropy_closed_form_error = 0.0;  // init stage: max |tau H - tau ln N| / (tau ln N)
  std::vector<std::string> warnings;

  const MagnitudeSeries& get(const std::string& quantity) const;
};

struct EnergyProbeOptions {
  std::size_t seeds = 8;
  std::size_t seq_len = 32;
  std::size_t trained_steps = 0;  // > 0 trains on `data` with `train` first (observational)
  std::uint64_t seed = 0;
};

/// At init, magnitudes are mean |term| per token over seeds under uniform
/// posteriors and random group-initialised parameters. After training they use the
/// MFVI posteriors of held-out sequences.
EnergyProbe energy_entropy_probe(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                 const EnergyProbeOptions& options, const TrainData* data = nullptr,
                                 const TrainOptions* train = nullptr, const HPPoint* hp = nullptr);

nlohmann::json to_json(const EnergyProbe& probe);

}  // namespace mupt
