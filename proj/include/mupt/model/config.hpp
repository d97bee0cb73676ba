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
#include <cstddef>
#include <string_view>

#include <json.hpp>

namespace mupt {

enum class Paradigm { ScaleChannels, ScaleRank };

std::string_view to_string(Paradigm p);
Paradigm parse_paradigm(std::string_view s);

/// Geometry of one PT instance.
struct PTConfig {
  std::size_t width = 64;     // N, number of values of each Z variable
  std::size_t rank = 16;      // r of the ternary factors U_c V_c^T
  std::size_t channels = 2;   // C, head-selection channels
  std::size_t topics = 32;    // M, number of G values
  std::size_t mfvi_iters = 6;
  std::size_t vocab_size = 259;
  std::size_t max_len = 32;
  Paradigm paradigm = Paradigm::ScaleChannels;
  bool pos_bias = true;
  std::size_t pos_buckets = 32;
  double norm_eps = 1e-6;

  // tau = N / r multiplies every potential and the Q_z entropy.
  double temperature() const { return static_cast<double>(width) / static_cast<double>(rank); }
  void validate() const;
};

/// Multipliers on the six MFVI message terms. All ones is neutral.
struct InfoWeights {
  double unary = 1.0;      // S term in the Z logits
  double tern_dep = 1.0;   // ternary message into Z_i from its own heads
  double tern_head = 1.0;  // ternary message into Z_i from tokens that pick i as head
  double binary = 1.0;     // topic message into Z
  double attn = 1.0;       // head-selection logits
  double topic = 1.0;      // topic logits

  static constexpr std::array<std::string_view, 6> kNames = {"w_unary",  "w_tern_dep", "w_tern_head",
                                                             "w_binary", "w_attn",     "w_topic"};
  std::array<double, 6> to_array() const { return {unary, tern_dep, tern_head, binary, attn, topic}; }
  static InfoWeights from_array(const std::array<double, 6>& a) { return {a[0], a[1], a[2], a[3], a[4], a[5]}; }
  void validate() const;
};

nlohmann::json to_json(const PTConfig& c);
PTConfig pt_config_from_json(const nlohmann::json& j);

}  // namespace mupt
