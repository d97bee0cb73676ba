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


#include "mupt/exp/local_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mupt/core/error.hpp"
#include "mupt/exp/svg.hpp"

namespace mupt {

namespace {

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw ContractError(std::string(name) + " must lie in (0, 1)");
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double min_samples_bound(double p, double alpha) {
  check_unit(p, "p");
  check_unit(alpha, "alpha");
  return std::log(alpha) / std::log1p(-p);
}

std::size_t min_samples(double p, double alpha) {
  const double bound = min_samples_bound(p, alpha);
  auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(bound)));
  // ceil on a rounded quotient can land one off; settle on the exact condition.
  while (n > 1 && 1.0 - std::pow(1.0 - p, static_cast<double>(n - 1)) >= 1.0 - alpha) --n;
  while (1.0 - std::pow(1.0 - p, static_cast<double>(n)) < 1.0 - alpha) ++n;
  return n;
}

double top_fraction_confidence(double p, std::size_t n) {
  check_unit(p, "p");
  return 1.0 - std::pow(1.0 - p, static_cast<double>(n));
}

std::vector<HPPoint> sample_neighborhood(const HPPoint& base, std::size_t n, SeededRng& rng, double halfwidth) {
  if (n < 1) throw ContractError("sample_neighborhood: n must be >= 1");
  if (!(halfwidth >= 0.0 && halfwidth < 1.0)) throw ContractError("sample_neighborhood: halfwidth must be in [0, 1)");
  base.validate();
  const auto b = base.to_array();
  std::vector<HPPoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::array<double, 7> a{};
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = halfwidth == 0.0 ? b[i] : rng.uniform((1.0 - halfwidth) * b[i], (1.0 + halfwidth) * b[i]);
    }
    out.push_back(HPPoint::from_array(a));
  }
  return out;
}

double hp_distance(const HPPoint& s_prime, const HPPoint& s) {
  const auto a = s_prime.to_array();
  const auto b = s.to_array();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] == 0.0) throw ContractError("hp_distance: base coordinate " + std::string(HPPoint::kNames[i]) + " is 0");
    const double d = (a[i] - b[i]) / b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

void check_local_opt_budget(const LocalOptOptions& options) {
  const std::size_t n = min_samples(options.p, options.alpha);
  if (options.max_runs != 0 && options.max_runs < n + 1) {
    throw ContractError("verify-local-opt budget of " + std::to_string(options.max_runs) + " runs is below the " +
                        std::to_string(n + 1) + " required (base + n = " + std::to_string(n) + " samples)");
  }
}

LocalOptReport verify_local_optimality(const HPPoint& base, const LocalOptOptions& options, const PTConfig& config,
                                       const TrainData& data, const TrainOptions& train, const std::string& config_hash) {
  check_local_opt_budget(options);
  LocalOptReport rep;
  rep.p = options.p;
  rep.alpha = options.alpha;
  rep.n = min_samples(options.p, options.alpha);
  rep.confidence = top_fraction_confidence(options.p, rep.n);
  SeededRng rng(mix_seed(options.sample_seed, 3));
  std::vector<HPPoint> points{base};
  for (auto& hp : sample_neighborhood(base, rep.n, rng, options.halfwidth)) points.push_back(hp);

  for (std::size_t k = 0; k < points.size(); ++k) {
    const RunRecord r = train_run(config, points[k], data, train, config_hash);
    LocalOptSample s;
    s.id = k;
    s.hp = points[k];
    s.distance = hp_distance(points[k], base);
    s.diverged = r.diverged;
    s.loss = r.diverged ? std::numeric_limits<double>::infinity() : r.final_eval_loss;
    rep.samples.push_back(s);
  }
  rep.base_loss = rep.samples[0].loss;
  if (!std::isfinite(rep.base_loss)) throw NumericError("verify_local_optimality: the base run diverged");
  for (std::size_t k = 1; k < rep.samples.size(); ++k) {
    auto& s = rep.samples[k];
    s.loss_increase_rel = (s.loss - rep.base_loss) / rep.base_loss;
    if (s.loss < rep.base_loss) {
      ++rep.base_rank;
      if (-s.loss_increase_rel <= options.noise_tolerance) {
        s.within_noise = true;
        ++rep.within_noise;
      } else {
        ++rep.base_rank_tolerant;
      }
    } else if (s.loss == rep.base_loss) {
      rep.base_tied = true;
    }
  }
  rep.top_fraction_supported = rep.base_rank_tolerant == 1;
  return rep;
}

void write_local_opt_csv(std::ostream& out, const LocalOptReport& report) {
  out << "sample_id,distance,loss,loss_increase_rel\n";
  for (const auto& s : report.samples) {
    out << s.id << "," << fmt(s.distance) << "," << fmt(s.loss) << "," << fmt(s.loss_increase_rel) << "\n";
  }
}

nlohmann::json to_json(const LocalOptReport& r) {
  nlohmann::json j;
  j["p"] = r.p;
  j["alpha"] = r.alpha;
  j["n"] = r.n;
  j["confidence"] = r.confidence;
  j["base_loss"] = r.base_loss;
  j["base_rank"] = r.base_rank;
  j["base_rank_tolerant"] = r.base_rank_tolerant;
  j["base_tied"] = r.base_tied;
  j["within_noise_tolerance"] = r.within_noise;
  j["top_fraction_supported"] = r.top_fraction_supported;
  char buf[160];
  std::snprintf(buf, sizeof buf, "base ranks %zu of %zu (%zu within noise tolerance); confidence %.4f of top-%g%% membership %s",
                r.base_rank, r.samples.size(), r.within_noise, r.confidence, 100.0 * r.p,
                r.top_fraction_supported ? "supported" : "not supported");
  j["statement"] = buf;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : r.samples) {
    nlohmann::json row{{"sample_id", s.id}, {"hp", to_json(s.hp)}, {"distance", s.distance},
                       {"diverged", s.diverged}, {"within_noise", s.within_noise}};
    if (std::isfinite(s.loss)) {
      row["loss"] = s.loss;
      row["loss_increase_rel"] = s.loss_increase_rel;
    } else {
      row["loss"] = "inf";
      row["loss_increase_rel"] = "inf";
    }
    rows.push_back(row);
  }
  j["samples"] = rows;
  return j;
}

std::string local_opt_scatter_svg(const LocalOptReport& report) {
  SvgPlot plot;
  plot.title = "Neighborhood samples";
  plot.x_label = "distance D(S', S)";
  plot.y_label = "relative eval loss increase";
  SvgSeries samples{"perturbed", {}, "#1f77b4"};
  SvgSeries noise{"within tolerance", {}, "#ff7f0e"};
  for (std::size_t k = 1; k < report.samples.size(); ++k) {
    const auto& s = report.samples[k];
    (s.within_noise ? noise : samples).points.emplace_back(s.distance, s.loss_increase_rel);
  }
  plot.series.push_back(samples);
  if (!noise.points.empty()) plot.series.push_back(noise);
  plot.series.push_back(SvgSeries{"base", {{0.0, 0.0}}, "#d62728", false, 5.0});
  plot.hlines.push_back(0.0);
  return plot.render();
}

std::string local_opt_rank_svg(const LocalOptReport& report) {
  std::vector<double> losses;
  for (const auto& s : report.samples) losses.push_back(s.loss);
  std::sort(losses.begin(), losses.end());
  SvgPlot plot;
  plot.title = "Eval loss by rank";
  plot.x_label = "rank";
  plot.y_label = "eval loss";
  SvgSeries curve{"all runs", {}, "#1f77b4", true};
  for (std::size_t k = 0; k < losses.size(); ++k) curve.points.emplace_back(static_cast<double>(k + 1), losses[k]);
  plot.series.push_back(curve);
  plot.series.push_back(
      SvgSeries{"base", {{static_cast<double>(report.base_rank), report.base_loss}}, "#d62728", false, 5.0});
  return plot.render();
}

}  // namespace mupt
