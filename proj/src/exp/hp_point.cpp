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


#include "mupt/exp/hp_point.hpp"

#include <cmath>
#include <string>

#include "mupt/core/error.hpp"

namespace mupt {

std::array<double, 7> HPPoint::to_array() const {
  const auto w = weights.to_array();
  return {eta, w[0], w[1], w[2], w[3], w[4], w[5]};
}

HPPoint HPPoint::from_array(const std::array<double, 7>& a) {
  return HPPoint{a[0], InfoWeights::from_array({a[1], a[2], a[3], a[4], a[5], a[6]})};
}

void HPPoint::validate() const {
  const auto a = to_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
      throw ContractError(std::string(kNames[i]) + " must be finite and > 0, got " + std::to_string(a[i]));
    }
  }
}

nlohmann::json to_json(const HPPoint& hp) {
  nlohmann::json j = nlohmann::json::object();
  const auto a = hp.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) j[std::string(HPPoint::kNames[i])] = a[i];
  return j;
}

HPPoint hp_from_json(const nlohmann::json& j) {
  HPPoint base;
  auto a = base.to_array();
  for (const auto& [key, value] : j.items()) {
    std::size_t i = 0;
    while (i < a.size() && HPPoint::kNames[i] != key) ++i;
    if (i == a.size()) throw ContractError("unknown key: " + key);
    a[i] = value.get<double>();
  }
  HPPoint hp = HPPoint::from_array(a);
  hp.validate();
  return hp;
}

}  // namespace mupt
