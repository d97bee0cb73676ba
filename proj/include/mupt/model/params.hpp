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

#include <array>
#include <functional>
#include <string_view>

#include "mupt/core/rng.hpp"
#include "mupt/core/tensor.hpp"
#include "mupt/model/config.hpp"
#include "mupt/mup/param_groups.hpp"

namespace mupt {

/// All learnable tensors of a PT model.
///
/// U and V are stored channel-major as [C x N x r]; block c is the factor pair
/// of T^(c) = U_c V_c^T. T is never materialized outside test oracles.
struct ModelParams {
  Tensor S;      // [V x N]   unary scores
  Tensor U;      // [C x N x r]
  Tensor V;      // [C x N x r]
  Tensor B;      // [M x N]   binary factor
  Tensor gamma;  // [N]       RMSNorm gain of the MLM head
  Tensor W_out;  // [N x V]   decoder
  Tensor b_out;  // [V]
  Tensor P_rel;  // [C x K]   relative-position bias on head logits

  static constexpr std::array<std::string_view, 8> kNames = {"S", "U", "V", "B", "gamma", "W_out", "b_out", "P_rel"};

  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  void for_each(const std::function<void(std::string_view, Tensor&)>& fn);
  void for_each(const std::function<void(std::string_view, const Tensor&)>& fn) const;
};

Shape param_shape(std::string_view name, const PTConfig& config);
void validate_params(const ModelParams& params, const PTConfig& config);

struct InitOptions {
  // Replaces the Output-group sigma (negative keeps 1/N); used by scaling controls.
  double output_sigma = -1.0;
  bool zero_unary = false;
};

/// Draws every tensor from its group's width-N distribution, in kNames order.
ModelParams init_model_params(const PTConfig& config, SeededRng& rng, const InitOptions& options = {});
ModelParams zero_model_params(const PTConfig& config);
std::size_t parameter_count(const PTConfig& config);

}  // namespace mupt
