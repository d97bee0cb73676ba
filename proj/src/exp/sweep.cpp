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


#include "mupt/exp/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mupt/core/error.hpp"

namespace mupt {

std::vector<double> half_decade_grid(double center, std::size_t points) {
  if (!(center > 0.0)) throw ContractError("half_decade_grid: center must be > 0");
  if (points < 1) throw ContractError("half_decade_grid: need at least one point");
  std::vector<double> out;
  const double mid = (static_cast<double>(points) - 1.0) / 2.0;
  for (std::size_t k = 0; k < points; ++k) {
    out.push_back(center * std::pow(10.0, 0.5 * (static_cast<double>(k) - mid)));
  }
  return out;
}

namespace {

void validate_grid(const std::vector<double>& lrs) {
  if (lrs.empty()) throw ContractError("transfer_sweep: empty lr grid");
  for (double lr : lrs) {
    if (!(lr > 0.0)) throw ContractError("transfer_sweep: learning rates must be > 0");
  }
  if (lrs.size() == 1) return;
  if (lrs.size() < 5) throw ContractError("transfer_sweep: the lr grid needs >= 5 points (or exactly one)");
  const double step = std::sqrt(10.0);
  for (std::size_t i = 1; i < lrs.size(); ++i) {
    if (std::abs(lrs[i] / lrs[i - 1] / step - 1.0) > 1e-6) {
      throw ContractError("transfer_sweep: lr grid must be ascending half-decades (ratio sqrt(10))");
    }
  }
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SweepResult transfer_sweep(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                           const std::vector<double>& lrs, const InfoWeights& weights, const TrainData& data,
                           const TrainOptions& options, const std::string& config_hash) {
  if (widths.size() < 2) throw ContractError("transfer_sweep: need at least two widths");
  validate_grid(lrs);
  SweepResult res;
  res.widths = widths;
  res.lrs = lrs;
  for (std::size_t w : widths) {
    const PTConfig config = scaler.scale(w);
    std::size_t best = lrs.size();
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lrs.size(); ++k) {
      SweepCell cell{w, lrs[k], train_run(config, HPPoint{lrs[k], weights}, data, options, config_hash)};
      if (!cell.record.diverged && cell.record.final_eval_loss < best_loss) {
        best_loss = cell.record.final_eval_loss;
        best = k;
      }
      res.cells.push_back(std::move(cell));
    }
    if (best == lrs.size()) throw NumericError("sweep failure: all cells diverged at width " + std::to_string(w));
    res.argmin.push_back(best);
  }
  for (std::size_t a : res.argmin) {
    for (std::size_t b : res.argmin) res.max_displacement = std::max(res.max_displacement, a > b ? a - b : b - a);
  }
  return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "width,lr,seed,step,split,loss\n";
  for (const auto& c : result.cells) {
    const auto& r = c.record;
    const std::string prefix = std::to_string(c.width) + "," + fmt(c.lr) + "," + std::to_string(r.seed) + ",";
    for (std::size_t s = 0; s < r.train_loss.size(); ++s) {
      out << prefix << (s + 1) << ",train," << fmt(r.train_loss[s]) << "\n";
    }
    for (const auto& e : r.eval) out << prefix << e.step << ",eval," << fmt(e.loss) << "\n";
  }
}

nlohmann::json to_json(const SweepResult& result) {
  nlohmann::json j;
  j["widths"] = result.widths;
  j["lrs"] = result.lrs;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json row{{"width", c.width}, {"lr", c.lr}, {"diverged", c.record.diverged}};
    if (c.record.diverged) row["final_eval_loss"] = "inf";
    else row["final_eval_loss"] = c.record.final_eval_loss;
    table.push_back(row);
  }
  j["cells"] = table;
  nlohmann::json best = nlohmann::json::array();
  for (std::size_t i = 0; i < result.widths.size(); ++i) {
    best.push_back({{"width", result.widths[i]}, {"argmin_index", result.argmin[i]},
                    {"argmin_lr", result.lrs[result.argmin[i]]}});
  }
  j["argmin"] = best;
  j["max_displacement"] = result.max_displacement;
  return j;
}

}  // namespace mupt
