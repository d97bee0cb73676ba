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

namespace mupt {

/// ln(alpha) / ln(1 - p): the real-valued sample bound.
double min_samples_bound(double p, double alpha);
/// Smallest n with 1 - (1 - p)^n >= 1 - alpha.
std::size_t min_samples(double p, double alpha);
/// Probability that the best of n uniform draws lies in the top-p fraction: 1 - (1 - p)^n.
double top_fraction_confidence(double p, std::size_t n);

/// n points with every coordinate uniform in [(1 - halfwidth) s_i, (1 + halfwidth) s_i].
std::vector<HPPoint> sample_neighborhood(const HPPoint& base, std::size_t n, SeededRng& rng, double halfwidth = 0.2);

/// sqrt(sum_i ((s'_i - s_i) / s_i)^2)
double hp_distance(const HPPoint& s_prime, const HPPoint& s);

struct LocalOptOptions {
  double p = 0.05;
  double alpha = 0.05;
  double halfwidth = 0.2;
  double noise_tolerance = 0.004;  // relative loss decrease still counted as a tie
  std::size_t max_runs = 0;        // budget in training runs (base included); 0 = unlimited
  std::uint64_t sample_seed = 0;
};

struct LocalOptSample {
  std::size_t id = 0;  // 0 is the base point
  HPPoint hp;
  double distance = 0.0;
  double loss = 0.0;  // +inf when diverged
  double loss_increase_rel = 0.0;
  bool diverged = false;
  bool within_noise = false;  // beats the base by no more than the tolerance
};

struct LocalOptReport {
  double p = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  double confidence = 0.0;
  double base_loss = 0.0;
  std::size_t base_rank = 1;            // 1 + number of samples strictly better than the base
  std::size_t base_rank_tolerant = 1;   // same, ignoring wins within the noise tolerance
  bool base_tied = false;
  std::size_t within_noise = 0;
  bool top_fraction_supported = false;  // base_rank_tolerant == 1
  std::vector<LocalOptSample> samples;  // base first
};

void check_local_opt_budget(const LocalOptOptions& options);

LocalOptReport verify_local_optimality(const HPPoint& base, const LocalOptOptions& options, const PTConfig& config,
                                       const TrainData& data, const TrainOptions& train, const std::string& config_hash);

// Header: sample_id,distance,loss,loss_increase_rel
void write_local_opt_csv(std::ostream& out, const LocalOptReport& report);
nlohmann::json to_json(const LocalOptReport& report);
// Distance vs relative loss increase, base marked.
std::string local_opt_scatter_svg(const LocalOptReport& report);
// Sorted losses against rank, base marked.
std::string local_opt_rank_svg(const LocalOptReport& report);

}  // namespace mupt
