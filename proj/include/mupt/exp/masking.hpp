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

#include <span>
#include <string_view>
#include <vector>

#include "mupt/core/rng.hpp"
#include "mupt/exp/corpus.hpp"

namespace mupt {

// Bert: selected positions become MASK 80%, a random regular token 10%, unchanged 10%.
// Pure: every selected position becomes MASK.
enum class MaskRule { Bert, Pure };

std::string_view to_string(MaskRule r);
MaskRule parse_mask_rule(std::string_view s);

struct MaskedSeq {
  std::vector<int> inputs;
  std::vector<int> targets;    // original ids at `positions`
  std::vector<int> positions;  // ascending
};

/// Selects round(ratio * n_maskable) non-PAD positions uniformly without replacement.
MaskedSeq mask_tokens(std::span<const int> seq, double ratio, SeededRng& rng, MaskRule rule,
                      const SpecialIds& specials, std::size_t regular_vocab);

}  // namespace mupt
