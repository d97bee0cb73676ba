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


#include "mupt/core/grad_check.hpp"

#include <cmath>
#include <cstring>

#include "mupt/core/error.hpp"

namespace mupt {

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& t : tensors) m = std::max(m, t.max_rel_error);
  return m;
}

double GradCheckReport::max_abs_error() const {
  double m = 0.0;
  for (const auto& t : tensors) m = std::max(m, t.max_abs_error);
  return m;
}

bool GradCheckReport::passed() const {
  for (const auto& t : tensors) {
    if (t.failures != 0) return false;
  }
  return true;
}

double evaluate_loss(const LossBuilder& loss, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.constant(p));
  Var out = loss(tape, vars);
  if (out.value().size() != 1) throw ContractError("loss builder must return a scalar");
  return out.value()[0];
}

GradCheckReport finite_diff_check(const LossBuilder& loss, const std::vector<NamedTensor>& params,
                                  const GradCheckOptions& options) {
  if (!(options.step >= 1e-7 && options.step <= 1e-3)) {
    throw ContractError("finite_diff_check: step must lie in [1e-7, 1e-3]");
  }
  std::vector<Tensor> values;
  for (const auto& p : params) values.push_back(p.value);

  const double base1 = evaluate_loss(loss, values);
  const double base2 = evaluate_loss(loss, values);
  if (std::memcmp(&base1, &base2, sizeof(double)) != 0) {
    throw ContractError("finite_diff_check: loss function is not deterministic");
  }

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& v : values) vars.push_back(tape.parameter(v));
    Var out = loss(tape, vars);
    analytic = reverse_grad(out, vars);
  }

  const double h = options.step;
  const double significant = options.abs_floor / options.rel_tol;
  GradCheckReport report;
  for (std::size_t t = 0; t < values.size(); ++t) {
    TensorGradCheck tc;
    tc.name = params[t].name;
    Tensor& x = values[t];
    const std::size_t count = x.size();
    std::size_t stride = 1;
    if (options.max_coords_per_tensor > 0 && count > options.max_coords_per_tensor) {
      stride = (count + options.max_coords_per_tensor - 1) / options.max_coords_per_tensor;
    }
    for (std::size_t i = 0; i < count; i += stride) {
      const double orig = x[i];
      x[i] = orig + h;
      const double fp = evaluate_loss(loss, values);
      x[i] = orig - h;
      const double fm = evaluate_loss(loss, values);
      x[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[t][i];
      const double err = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double allowed = std::max(options.rel_tol * scale, options.abs_floor);
      const double score = err / allowed;
      ++tc.checked;
      if (score > 1.0) ++tc.failures;
      tc.max_abs_error = std::max(tc.max_abs_error, err);
      if (scale >= significant) tc.max_rel_error = std::max(tc.max_rel_error, err / scale);
      if (score >= tc.worst_score) {
        tc.worst_score = score;
        tc.worst_index = i;
        tc.worst_analytic = a;
        tc.worst_numeric = numeric;
      }
    }
    report.tensors.push_back(std::move(tc));
  }
  return report;
}

}  // namespace mupt
