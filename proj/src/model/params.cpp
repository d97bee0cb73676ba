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


#include "mupt/model/params.hpp"

#include <string>

#include "mupt/core/error.hpp"

namespace mupt {

Tensor& ModelParams::get(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ModelParams&>(*this).get(name));
}

const Tensor& ModelParams::get(std::string_view name) const {
  if (name == "S") return S;
  if (name == "U") return U;
  if (name == "V") return V;
  if (name == "B") return B;
  if (name == "gamma") return gamma;
  if (name == "W_out") return W_out;
  if (name == "b_out") return b_out;
  if (name == "P_rel") return P_rel;
  throw ContractError("unknown parameter: " + std::string(name));
}

void ModelParams::for_each(const std::function<void(std::string_view, Tensor&)>& fn) {
  for (auto name : kNames) fn(name, get(name));
}

void ModelParams::for_each(const std::function<void(std::string_view, const Tensor&)>& fn) const {
  for (auto name : kNames) fn(name, get(name));
}

Shape param_shape(std::string_view name, const PTConfig& c) {
  if (name == "S") return {c.vocab_size, c.width};
  if (name == "U" || name == "V") return {c.channels, c.width, c.rank};
  if (name == "B") return {c.topics, c.width};
  if (name == "gamma") return {c.width};
  if (name == "W_out") return {c.width, c.vocab_size};
  if (name == "b_out") return {c.vocab_size};
  if (name == "P_rel") return {c.channels, c.pos_buckets};
  throw ContractError("unknown parameter: " + std::string(name));
}

void validate_params(const ModelParams& params, const PTConfig& config) {
  params.for_each([&](std::string_view name, const Tensor& t) {
    const Shape want = param_shape(name, config);
    if (t.shape() != want) {
      throw ShapeError("parameter " + std::string(name) + " has shape " + shape_str(t.shape()) + ", config needs " +
                       shape_str(want));
    }
  });
}

ModelParams init_model_params(const PTConfig& config, SeededRng& rng, const InitOptions& options) {
  config.validate();
  ModelParams p;
  p.for_each([&](std::string_view name, Tensor& t) {
    const ParamGroup group = classify_param(name);
    const Shape shape = param_shape(name, config);
    if (name == "S" && options.zero_unary) {
      t = Tensor(shape, 0.0);
    } else if (group == ParamGroup::Output && options.output_sigma >= 0.0) {
      t = gaussian_tensor(rng, shape, options.output_sigma);
    } else {
      t = init_param(group, shape, config.width, rng);
    }
  });
  return p;
}

ModelParams zero_model_params(const PTConfig& config) {
  config.validate();
  ModelParams p;
  p.for_each([&](std::string_view name, Tensor& t) { t = Tensor(param_shape(name, config), 0.0); });
  return p;
}

std::size_t parameter_count(const PTConfig& config) {
  std::size_t n = 0;
  for (auto name : ModelParams::kNames) {
    if (name == "P_rel" && !config.pos_bias) continue;
    n += shape_size(param_shape(name, config));
  }
  return n;
}

}  // namespace mupt
