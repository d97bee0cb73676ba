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

#include <string>
#include <string_view>

#include "mupt/core/rng.hpp"
#include "mupt/core/tensor.hpp"

namespace mupt {

enum class ParamGroup { Input, Hidden, Output, Bias };

// Which learning rate the Output group receives.
//   Table2:    eta / N (the default, consistent with the init sigmas)
//   AppendixC: eta (output multiplier left at 1)
enum class OutputLrVariant { Table2, AppendixC };

std::string_view to_string(ParamGroup g);
ParamGroup parse_param_group(std::string_view s);
std::string_view to_string(OutputLrVariant v);
OutputLrVariant parse_output_lr_variant(std::string_view s);

/// Group of a model tensor by member name. Per-channel spellings "U.3" / "V.3"
/// are accepted. Unknown names throw rather than defaulting.
ParamGroup classify_param(std::string_view name);

/// Standard deviation of the width-N initialization: Input 1, Hidden 1/sqrt(N),
/// Output 1/N, Bias 0.
double init_sigma(ParamGroup group, std::size_t width);
Tensor init_param(ParamGroup group, const Shape& shape, std::size_t width, SeededRng& rng);

/// Per-group learning rate: Input/Bias eta, Hidden eta/N, Output eta/N (Table2) or eta (AppendixC).
double group_lr(ParamGroup group, double eta_base, std::size_t width,
                OutputLrVariant variant = OutputLrVariant::Table2);

// Decoupled weight decay applies to weight matrices only.
bool decays(std::string_view name);

}  // namespace mupt
