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
#include <map>
#include <optional>
#include <span>
#include <string>

#include "mupt/core/tensor.hpp"
#include "mupt/model/params.hpp"
#include "mupt/mup/param_groups.hpp"

namespace mupt {

// Fixed optimizer constants; they are not part of the transferred hyperparameters.
struct AdamWConstants {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::uint64_t warmup_steps = 0;
};

struct OptimState {
  AdamWConstants constants;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

struct ParamSlot {
  std::string name;
  Tensor* param = nullptr;
  const Tensor* grad = nullptr;
  double lr = 0.0;
  bool decay = false;
};

/// One decoupled-weight-decay Adam step over all slots, with bias-corrected
/// moments and optional linear warmup of every learning rate.
void adamw_step(std::span<ParamSlot> slots, OptimState& opt);

/// Learning rate of each ModelParams tensor.
struct LrPolicy {
  double eta = 1e-2;
  std::size_t width = 64;
  OutputLrVariant output_variant = OutputLrVariant::Table2;
  // When set, the Hidden group uses eta / hidden_width instead of eta / width
  // (a width-independent hidden LR, i.e. the mis-scaled control).
  std::optional<std::size_t> hidden_width;

  double lr_for(std::string_view name) const;
};

void adamw_step(ModelParams& params, const ModelParams& grads, OptimState& opt, const LrPolicy& policy);

}  // namespace mupt
