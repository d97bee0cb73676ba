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


#include "mupt/exp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mupt/core/error.hpp"

namespace mupt {

namespace {

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

}  // namespace

std::string SvgPlot::render() const {
  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || (log_x && x <= 0)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  for (double h : hlines) {
    y0 = std::min(y0, h);
    y1 = std::max(y1, h);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  auto sx = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto sxr = [&](double u) { return left + (u - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title)
    << "</text>\n";
  o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(x0, x1, 6)) {
    const double x = sxr(t);
    o << "<line x1=\"" << px(x) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(x) << "\" y2=\"" << px(top + ph + 5)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(x) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\">"
      << (log_x ? num(std::pow(10.0, t)) : num(t)) << "</text>\n";
  }
  for (double t : nice_ticks(y0, y1, 6)) {
    const double y = sy(t);
    o << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(left) << "\" y2=\"" << px(y)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(left - 8) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  o << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(height - 12.0) << "\" text-anchor=\"middle\">"
    << esc(x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << px(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(y_label) << "</text>\n";
  for (double h : hlines) {
    o << "<line x1=\"" << px(left) << "\" y1=\"" << px(sy(h)) << "\" x2=\"" << px(left + pw) << "\" y2=\"" << px(sy(h))
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    if (s.line) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : s.points) {
        if (std::isfinite(x) && std::isfinite(y) && !(log_x && x <= 0)) o << px(sx(x)) << "," << px(sy(y)) << " ";
      }
      o << "\"/>\n";
    } else {
      for (auto [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y) || (log_x && x <= 0)) continue;
        o << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"" << px(s.radius) << "\" fill=\""
          << s.color << "\"/>\n";
      }
    }
    const double ly = top + 14 + 18 * static_cast<double>(k);
    o << "<rect x=\"" << px(left + pw + 12) << "\" y=\"" << px(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
      << s.color << "\"/>";
    o << "<text x=\"" << px(left + pw + 28) << "\" y=\"" << px(ly) << "\">" << esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write " + path);
  out << text;
  if (!out) throw ContractError("write failed: " + path);
}

}  // namespace mupt
