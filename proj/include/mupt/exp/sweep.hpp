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

#include <ostream>
#include <vector>

#include "mupt/exp/train.hpp"
#include "mupt/mup/width_scaler.hpp"

namespace mupt {

/// Geometric grid with ratio sqrt(10) centred on `center` (odd counts include it).
std::vector<double> half_decade_grid(double center, std::size_t points);

struct SweepCell {
  std::size_t width = 0;
  double lr = 0.0;
  RunRecord record;
};

struct SweepResult {
  std::vector<std::size_t> widths;
  std::vector<double> lrs;
  std::vector<SweepCell> cells;  // width-major, then lr
  std::vector<std::size_t> argmin;  // grid index of the best lr per width
  std::size_t max_displacement = 0;  // largest argmin distance between any two widths, in grid steps

  const SweepCell& cell(std::size_t width_index, std::size_t lr_index) const {
    return cells[width_index * lrs.size() + lr_index];
  }
};

/// Trains every (width, lr) cell on the same data stream and seed. Widths
/// are derived from the scaler; `options.hidden_lr_width` selects a control.
SweepResult transfer_sweep(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                           const std::vector<double>& lrs, const InfoWeights& weights, const TrainData& data,
                           const TrainOptions& options, const std::string& config_hash);

// Header: width,lr,seed,step,split,loss
void write_sweep_csv(std::ostream& out, const SweepResult& result);
nlohmann::json to_json(const SweepResult& result);

}  // namespace mupt
