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

#include <array>
#include <string_view>

#include <json.hpp>

#include "mupt/model/config.hpp"

namespace mupt {

/// The 7-dim transferable hyperparameter vector: base LR, then the six info weights.
struct HPPoint {
  double eta = 1e-2;
  // Unit weights put the default initialisation in the saturated (one-hot Q_z) regime
  // from width 64 up; 0.2 keeps MFVI at init near its uniform fixed point.
  InfoWeights weights{0.2, 0.2, 0.2, 0.2, 0.2, 0.2};

  static constexpr std::array<std::string_view, 7> kNames = {"eta",      "w_unary", "w_tern_dep", "w_tern_head",
                                                             "w_binary", "w_attn",  "w_topic"};
  std::array<double, 7> to_array() const;
  static HPPoint from_array(const std::array<double, 7>& a);
  void validate() const;
};

nlohmann::json to_json(const HPPoint& hp);
HPPoint hp_from_json(const nlohmann::json& j);

}  // namespace mupt
