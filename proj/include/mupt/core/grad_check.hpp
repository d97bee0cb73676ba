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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mupt/core/autograd.hpp"

namespace mupt {

// Builds a scalar loss on `tape` from parameter Vars given in the same order
// as the tensors handed to finite_diff_check. Must be a pure function.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct GradCheckOptions {
  double step = 1e-5;
  // A coordinate passes when |analytic - numeric| <= max(rel_tol * scale, abs_floor),
  // scale = max(|analytic|, |numeric|).
  double rel_tol = 1e-6;
  double abs_floor = 1e-8;
  // 0 checks every coordinate; otherwise an evenly strided subset per tensor.
  std::size_t max_coords_per_tensor = 0;
};

struct TensorGradCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double max_abs_error = 0.0;
  // Largest relative error among coordinates whose scale exceeds abs_floor / rel_tol.
  double max_rel_error = 0.0;
  // Coordinate with the largest |err| / max(rel_tol * scale, abs_floor).
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double worst_score = 0.0;
};

struct GradCheckReport {
  std::vector<TensorGradCheck> tensors;
  double max_rel_error() const;
  double max_abs_error() const;
  bool passed() const;
};

/// Compares reverse-mode gradients with central differences
/// (f(x + h e) - f(x - h e)) / 2h, coordinate by coordinate.
GradCheckReport finite_diff_check(const LossBuilder& loss, const std::vector<NamedTensor>& params,
                                  const GradCheckOptions& options = {});

double evaluate_loss(const LossBuilder& loss, const std::vector<Tensor>& params);

}  // namespace mupt
