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


#include "mupt/diag/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mupt/core/error.hpp"

namespace mupt {

const CoordRow& CoordReport::row(std::size_t width, const std::string& probe, std::size_t step) const {
  for (const auto& r : rows) {
    if (r.width == width && r.probe == probe && r.step == step) return r;
  }
  throw ContractError("coord report has no row for width " + std::to_string(width) + ", probe " + probe +
                      ", step " + std::to_string(step));
}

bool CoordReport::has(std::size_t width, const std::string& probe, std::size_t step) const {
  for (const auto& r : rows) {
    if (r.width == width && r.probe == probe && r.step == step) return true;
  }
  return false;
}

void write_coord_csv(std::ostream& out, const CoordReport& report) {
  out << "width,probe,step,mean_abs,variance\n";
  char buf[64];
  for (const auto& r : report.rows) {
    out << r.width << "," << r.probe << "," << r.step << ",";
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.mean_abs, r.variance);
    out << buf << "\n";
  }
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit_loglog: x and y differ in length");
  if (x.size() < 2) throw ContractError("fit_loglog: insufficient points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ContractError("fit_loglog: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ContractError("fit_loglog: all x values are equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.points = lx.size();
  return f;
}

nlohmann::json summary_json(const std::string& kind, nlohmann::json data, const std::vector<Assertion>& assertions) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  j["data"] = std::move(data);
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& a : assertions) {
    list.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    all = all && a.passed;
  }
  j["assertions"] = list;
  j["all_passed"] = all;
  return j;
}

BandCheck check_band(const CoordReport& report, const std::vector<std::string>& probes, std::size_t step_from,
                     std::size_t step_to, double lo, double hi) {
  BandCheck out;
  double worst_log = 0.0;
  for (const auto& probe : probes) {
    for (std::size_t step = step_from; step <= step_to; ++step) {
      for (std::size_t k = 1; k < report.widths.size(); ++k) {
        const std::size_t a = report.widths[k - 1], b = report.widths[k];
        if (!report.has(a, probe, step) || !report.has(b, probe, step)) {
          out.passed = false;
          out.where = "missing " + probe + " at step " + std::to_string(step);
          continue;
        }
        const double ma = report.row(a, probe, step).mean_abs;
        const double mb = report.row(b, probe, step).mean_abs;
        double ratio = 0.0;
        if (ma == 0.0 && mb == 0.0) ratio = 1.0;
        else if (ma == 0.0) ratio = std::numeric_limits<double>::infinity();
        else ratio = mb / ma;
        const bool ok = ratio >= lo && ratio <= hi;
        const double lg = ratio > 0.0 ? std::abs(std::log(ratio)) : std::numeric_limits<double>::infinity();
        if (lg > worst_log) {
          worst_log = lg;
          out.worst_ratio = ratio;
          out.where = probe + " step " + std::to_string(step) + " widths " + std::to_string(a) + "->" + std::to_string(b);
        }
        out.passed = out.passed && ok;
      }
    }
  }
  return out;
}

}  // namespace mupt
