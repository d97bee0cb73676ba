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


#include "mupt/mup/param_groups.hpp"

#include <cctype>
#include <cmath>

#include "mupt/core/error.hpp"

namespace mupt {

std::string_view to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Input: return "input";
    case ParamGroup::Hidden: return "hidden";
    case ParamGroup::Output: return "output";
    case ParamGroup::Bias: return "bias";
  }
  return "?";
}

ParamGroup parse_param_group(std::string_view s) {
  if (s == "input") return ParamGroup::Input;
  if (s == "hidden") return ParamGroup::Hidden;
  if (s == "output") return ParamGroup::Output;
  if (s == "bias") return ParamGroup::Bias;
  throw FormatError("unknown parameter group: " + std::string(s));
}

std::string_view to_string(OutputLrVariant v) { return v == OutputLrVariant::Table2 ? "table2" : "appendix-c"; }

OutputLrVariant parse_output_lr_variant(std::string_view s) {
  if (s == "table2") return OutputLrVariant::Table2;
  if (s == "appendix-c") return OutputLrVariant::AppendixC;
  throw ContractError("output_lr_variant must be table2 or appendix-c, got " + std::string(s));
}

namespace {
std::string_view strip_channel(std::string_view name) {
  auto dot = name.find('.');
  if (dot == std::string_view::npos) return name;
  auto suffix = name.substr(dot + 1);
  if (suffix.empty()) return std::string_view{};
  for (char c : suffix) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::string_view{};
  }
  return name.substr(0, dot);
}
}  // namespace

ParamGroup classify_param(std::string_view name) {
  const std::string_view base = strip_channel(name);
  if (base == "S" || base == "gamma") return ParamGroup::Input;
  if (base == "U" || base == "V" || base == "B") return ParamGroup::Hidden;
  if (base == "W_out") return ParamGroup::Output;
  if (base == "b_out" || base == "P_rel") return ParamGroup::Bias;
  throw ContractError("unknown parameter: " + std::string(name));
}

double init_sigma(ParamGroup group, std::size_t width) {
  if (width == 0) throw ContractError("init_sigma: width must be >= 1");
  const double n = static_cast<double>(width);
  switch (group) {
    case ParamGroup::Input: return 1.0;
    case ParamGroup::Hidden: return 1.0 / std::sqrt(n);
    case ParamGroup::Output: return 1.0 / n;
    case ParamGroup::Bias: return 0.0;
  }
  return 0.0;
}

Tensor init_param(ParamGroup group, const Shape& shape, std::size_t width, SeededRng& rng) {
  return gaussian_tensor(rng, shape, init_sigma(group, width));
}

double group_lr(ParamGroup group, double eta_base, std::size_t width, OutputLrVariant variant) {
  if (!(eta_base > 0.0)) throw ContractError("group_lr: eta_base must be > 0");
  if (width == 0) throw ContractError("group_lr: width must be >= 1");
  const double n = static_cast<double>(width);
  switch (group) {
    case ParamGroup::Input:
    case ParamGroup::Bias: return eta_base;
    case ParamGroup::Hidden: return eta_base / n;
    case ParamGroup::Output: return variant == OutputLrVariant::Table2 ? eta_base / n : eta_base;
  }
  return eta_base;
}

bool decays(std::string_view name) {
  const std::string_view base = strip_channel(name);
  return base == "S" || base == "U" || base == "V" || base == "B" || base == "W_out";
}

}  // namespace mupt
