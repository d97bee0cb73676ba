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

#include <string>
#include <utility>
#include <vector>

namespace mupt {

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  bool line = false;    // polyline instead of markers
  double radius = 3.0;  // marker radius
};

/// Minimal 2-D plot: linear or log10 x axis, linear y, ticks, legend.
struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<SvgSeries> series;
  std::vector<double> hlines;  // dashed horizontal reference lines
  int width = 640;
  int height = 420;

  std::string render() const;
};

void write_text_file(const std::string& path, const std::string& text);

}  // namespace mupt
