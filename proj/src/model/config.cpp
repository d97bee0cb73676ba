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


#include "mupt/model/config.hpp"

#include <string>

#include "mupt/core/error.hpp"

namespace mupt {

std::string_view to_string(Paradigm p) { return p == Paradigm::ScaleChannels ? "scale-channels" : "scale-rank"; }

Paradigm parse_paradigm(std::string_view s) {
  if (s == "scale-channels") return Paradigm::ScaleChannels;
  if (s == "scale-rank") return Paradigm::ScaleRank;
  throw ContractError("paradigm must be scale-channels or scale-rank, got " + std::string(s));
}

void PTConfig::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v < 1) throw ContractError(std::string("PTConfig.") + field + " must be >= 1");
  };
  positive(width, "width");
  positive(rank, "rank");
  positive(channels, "channels");
  positive(topics, "topics");
  positive(mfvi_iters, "mfvi_iters");
  positive(vocab_size, "vocab_size");
  positive(max_len, "max_len");
  positive(pos_buckets, "pos_buckets");
  if (rank > width) throw ContractError("PTConfig.rank must be <= width");
  if (!(norm_eps > 0.0)) throw ContractError("PTConfig.norm_eps must be > 0");
}

void InfoWeights::validate() const {
  const auto a = to_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) throw ContractError(std::string(kNames[i]) + " must be > 0");
  }
}

nlohmann::json to_json(const PTConfig& c) {
  return nlohmann::json{{"width", c.width},
                        {"rank", c.rank},
                        {"channels", c.channels},
                        {"topics", c.topics},
                        {"mfvi_iters", c.mfvi_iters},
                        {"vocab_size", c.vocab_size},
                        {"max_len", c.max_len},
                        {"paradigm", std::string(to_string(c.paradigm))},
                        {"pos_bias", c.pos_bias},
                        {"pos_buckets", c.pos_buckets},
                        {"norm_eps", c.norm_eps}};
}

PTConfig pt_config_from_json(const nlohmann::json& j) {
  PTConfig c;
  c.width = j.at("width").get<std::size_t>();
  c.rank = j.at("rank").get<std::size_t>();
  c.channels = j.at("channels").get<std::size_t>();
  c.topics = j.at("topics").get<std::size_t>();
  c.mfvi_iters = j.at("mfvi_iters").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
  c.pos_bias = j.at("pos_bias").get<bool>();
  c.pos_buckets = j.at("pos_buckets").get<std::size_t>();
  c.norm_eps = j.at("norm_eps").get<double>();
  c.validate();
  return c;
}

}  // namespace mupt
