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


#include "mupt/mup/width_scaler.hpp"

#include <cmath>

#include "mupt/core/error.hpp"

namespace mupt {

WidthScaler::WidthScaler(PTConfig base, Paradigm paradigm) : base_(std::move(base)), paradigm_(paradigm) {
  base_.paradigm = paradigm_;
  base_.validate();
}

namespace {

std::size_t scaled(std::size_t base_value, std::size_t width, std::size_t base_width, const char* what,
                   std::vector<std::string>* warnings) {
  const std::size_t num = base_value * width;
  if (num % base_width == 0) return num / base_width;
  if (width < base_width) {
    throw ContractError(std::string("scale_width: ") + what + " = " + std::to_string(base_value) + " * " +
                        std::to_string(width) + " / " + std::to_string(base_width) + " is not an integer");
  }
  const double exact = static_cast<double>(num) / static_cast<double>(base_width);
  const auto rounded = static_cast<std::size_t>(std::max(1.0, std::round(exact)));
  if (warnings) {
    warnings->push_back(std::string(what) + " rounded from " + std::to_string(exact) + " to " +
                        std::to_string(rounded) + " at width " + std::to_string(width));
  }
  return rounded;
}

}  // namespace

PTConfig WidthScaler::scale(std::size_t width, std::vector<std::string>* warnings) const {
  if (width < 1) throw ContractError("scale_width: width must be >= 1");
  PTConfig c = base_;
  c.width = width;
  c.topics = scaled(base_.topics, width, base_.width, "topics", warnings);
  if (paradigm_ == Paradigm::ScaleChannels) {
    c.channels = scaled(base_.channels, width, base_.width, "channels", warnings);
  } else {
    c.rank = scaled(base_.rank, width, base_.width, "rank", warnings);
  }
  c.validate();
  return c;
}

PTConfig scale_width(const WidthScaler& scaler, std::size_t width, std::vector<std::string>* warnings) {
  return scaler.scale(width, warnings);
}

}  // namespace mupt
