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
#include <string>
#include <vector>

#include <json.hpp>

namespace mupt {

inline constexpr int kReportSchemaVersion = 1;

struct CoordRow {
  std::size_t width = 0;
  std::string probe;
  std::size_t step = 0;
  double mean_abs = 0.0;
  double variance = 0.0;
};

/// Coordinate statistics per width, probe and step.
struct CoordReport {
  std::vector<std::size_t> widths;  // strictly increasing
  std::vector<CoordRow> rows;
  std::vector<std::string> failures;  // widths whose run diverged

  const CoordRow& row(std::size_t width, const std::string& probe, std::size_t step) const;
  bool has(std::size_t width, const std::string& probe, std::size_t step) const;
};

// Header: width,probe,step,mean_abs,variance
void write_coord_csv(std::ostream& out, const CoordReport& report);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual of the log-log fit
  std::size_t points = 0;
};

/// Least-squares line through (ln x, ln y). Needs >= 2 points, all positive.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct Assertion {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

/// {"schema_version", "kind", "data", "assertions": [...], "all_passed"}
nlohmann::json summary_json(const std::string& kind, nlohmann::json data, const std::vector<Assertion>& assertions);

/// Largest ratio between consecutive widths of one statistic, reported both ways.
struct BandCheck {
  bool passed = true;
  double worst_ratio = 1.0;  // the ratio farthest from 1 in log terms
  std::string where;
};

BandCheck check_band(const CoordReport& report, const std::vector<std::string>& probes, std::size_t step_from,
                     std::size_t step_to, double lo = 1.0 / 3.0, double hi = 3.0);

}  // namespace mupt
