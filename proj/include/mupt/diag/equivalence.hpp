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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupt/model/mfvi.hpp"

namespace mupt {

/// Posteriors after every sweep plus the final MLM logits of one computation path.
struct PathTrace {
  std::vector<Tensor> qh, qg, qz;
  Tensor mlm;
};

/// Energy-gradient form with explicit tau, tau*N and tau*M potential factors and a
/// dense T^(c) = U_c V_c^T. Z logits are -dE/dQ_z divided by tau; head logits are raw.
PathTrace tau_literal_path(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                           const InfoWeights& weights);
/// Production cancelled form (the pt-model graph).
PathTrace cancelled_path(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                         const InfoWeights& weights);
/// Untempered messages with the two explicit rescalings F <- F / r and feature <- N Q_z.
PathTrace scaled_activation_path(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                                 const InfoWeights& weights);

/// -dE/dQ_z(i, a) of the tempered energy (tau factors included), evaluated at `state`.
Tensor tau_literal_z_gradient(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                              const PTConfig& config, const InfoWeights& weights);

/// Row-scaled deviation: max over rows of max_k |a_k - b_k| / max_k max(|a_k|, |b_k|), rows along the last axis.
/// Identical rows count as 0; any NaN gives +inf.
double relative_deviation(const Tensor& a, const Tensor& b);

struct EquivalenceReport {
  double max_deviation = 0.0;
  std::string worst;  // "<pair> <tensor>"
  std::vector<std::pair<std::string, double>> per_tensor;
};

EquivalenceReport equivalence_check(const PTConfig& config, const ModelParams& params, const InfoWeights& weights,
                                    std::span<const int> tokens);
/// Random group-initialised model (random P_rel when enabled), random weights in [0.5, 1.5]
/// and a random sequence of min(8, max_len) tokens, all drawn from `seed`.
EquivalenceReport equivalence_check(const PTConfig& config, std::uint64_t seed);

nlohmann::json to_json(const EquivalenceReport& r);

}  // namespace mupt
