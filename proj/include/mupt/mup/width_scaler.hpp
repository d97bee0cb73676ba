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
#include <vector>

#include "mupt/model/config.hpp"

namespace mupt {

/// Derives the config of a wider (or narrower) model from a base config.
///
/// ScaleChannels keeps r fixed and grows C and M with N (tau = N / r0 grows).
/// ScaleRank keeps C fixed and grows r and M with N (tau = N0 / r0 constant).
/// Every non-geometry field (vocab, iterations, position bias) is copied.
class WidthScaler {
 public:
  WidthScaler(PTConfig base, Paradigm paradigm);

  const PTConfig& base() const { return base_; }
  Paradigm paradigm() const { return paradigm_; }

  // Non-multiples of the base width round the scaled quantities to the nearest
  // integer >= 1 and append a note to `warnings` (if given).
  PTConfig scale(std::size_t width, std::vector<std::string>* warnings = nullptr) const;

 private:
  PTConfig base_;
  Paradigm paradigm_;
};

PTConfig scale_width(const WidthScaler& scaler, std::size_t width, std::vector<std::string>* warnings = nullptr);

}  // namespace mupt
