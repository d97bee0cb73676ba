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


#include "mupt/mup/optimizer.hpp"

#include <cmath>
#include <vector>

#include "mupt/core/error.hpp"

namespace mupt {

void adamw_step(std::span<ParamSlot> slots, OptimState& opt) {
  for (const auto& s : slots) {
    if (!s.param || !s.grad) throw ContractError("adamw_step: slot " + s.name + " is unbound");
    if (s.param->shape() != s.grad->shape()) {
      throw ShapeError("adamw_step: " + s.name + " param " + shape_str(s.param->shape()) + " vs grad " +
                       shape_str(s.grad->shape()));
    }
  }
  const AdamWConstants& k = opt.constants;
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double warm =
      k.warmup_steps > 0 ? std::min(1.0, t / static_cast<double>(k.warmup_steps)) : 1.0;
  const double c1 = 1.0 - std::pow(k.beta1, t);
  const double c2 = 1.0 - std::pow(k.beta2, t);
  for (auto& s : slots) {
    Tensor& p = *s.param;
    const Tensor& g = *s.grad;
    auto [mit, m_new] = opt.first_moment.try_emplace(s.name, p.shape(), 0.0);
    auto [vit, v_new] = opt.second_moment.try_emplace(s.name, p.shape(), 0.0);
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    if (m.shape() != p.shape() || v.shape() != p.shape()) {
      throw ShapeError("adamw_step: optimizer state for " + s.name + " has shape " + shape_str(m.shape()));
    }
    const double lr = s.lr * warm;
    const double decay = s.decay ? lr * k.weight_decay : 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (decay != 0.0) p[i] -= decay * p[i];
      m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * g[i];
      v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + k.eps);
    }
  }
}

double LrPolicy::lr_for(std::string_view name) const {
  const ParamGroup group = classify_param(name);
  if (eta == 0.0) return 0.0;  // frozen run; group_lr wants eta > 0
  if (group == ParamGroup::Hidden && hidden_width) return group_lr(group, eta, *hidden_width, output_variant);
  return group_lr(group, eta, width, output_variant);
}

void adamw_step(ModelParams& params, const ModelParams& grads, OptimState& opt, const LrPolicy& policy) {
  std::vector<ParamSlot> slots;
  for (auto name : ModelParams::kNames) {
    slots.push_back(ParamSlot{std::string(name), &params.get(name), &grads.get(name), policy.lr_for(name),
                              decays(name)});
  }
  adamw_step(slots, opt);
}

}  // namespace mupt
