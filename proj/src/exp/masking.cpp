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


#include "mupt/exp/masking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mupt/core/error.hpp"

namespace mupt {

std::string_view to_string(MaskRule r) { return r == MaskRule::Bert ? "bert" : "pure"; }

MaskRule parse_mask_rule(std::string_view s) {
  if (s == "bert") return MaskRule::Bert;
  if (s == "pure") return MaskRule::Pure;
  throw ContractError("unknown mask_rule: " + std::string(s));
}

MaskedSeq mask_tokens(std::span<const int> seq, double ratio, SeededRng& rng, MaskRule rule,
                      const SpecialIds& specials, std::size_t regular_vocab) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("mask ratio must lie in (0, 1)");
  if (seq.empty()) throw ContractError("mask_tokens: empty sequence");
  std::vector<int> maskable;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] != specials.pad) maskable.push_back(static_cast<int>(i));
  }
  if (maskable.empty()) throw ContractError("mask_tokens: zero maskable positions");
  const auto count = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(maskable.size())));
  if (count == 0) {
    throw ContractError("mask_tokens: ratio " + std::to_string(ratio) + " selects no position among " +
                        std::to_string(maskable.size()));
  }
  // Partial Fisher-Yates.
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + rng.below(maskable.size() - k);
    std::swap(maskable[k], maskable[j]);
  }
  MaskedSeq out;
  out.inputs.assign(seq.begin(), seq.end());
  out.positions.assign(maskable.begin(), maskable.begin() + static_cast<long>(count));
  std::sort(out.positions.begin(), out.positions.end());
  for (int pos : out.positions) {
    out.targets.push_back(seq[static_cast<std::size_t>(pos)]);
    int& slot = out.inputs[static_cast<std::size_t>(pos)];
    if (rule == MaskRule::Pure) {
      slot = specials.mask;
      continue;
    }
    const double u = rng.uniform();
    if (u < 0.8) slot = specials.mask;
    else if (u < 0.9) slot = static_cast<int>(rng.below(regular_vocab));
  }
  return out;
}

}  // namespace mupt
