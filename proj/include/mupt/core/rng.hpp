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

#include <cstdint>
#include <optional>
#include <random>

#include "mupt/core/tensor.hpp"

namespace mupt {

/// Seeded pseudo-random source with a platform-independent output sequence.
///
/// The engine is mt19937_64, whose output is fixed by the C++ standard. The
/// uniform and normal transforms are implemented here instead of using the
/// <random> distributions, whose algorithms are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  // Number of raw 64-bit draws consumed so far.
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal (Marsaglia polar method, second value cached).
  double normal();
  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

  // Independent generator for a named sub-stream; does not advance *this.
  SeededRng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// i.i.d. normal(0, sigma^2) entries; sigma == 0 yields zeros.
Tensor gaussian_tensor(SeededRng& rng, const Shape& shape, double sigma);

}  // namespace mupt
