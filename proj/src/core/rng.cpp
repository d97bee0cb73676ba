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


#include "mupt/core/rng.hpp"

#include <cmath>

#include "mupt/core/error.hpp"

namespace mupt {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() {
  ++position_;
  return engine_();
}

double SeededRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw ContractError("SeededRng::below: empty range");
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

SeededRng SeededRng::fork(std::uint64_t stream) const { return SeededRng(mix_seed(seed_, stream)); }

Tensor gaussian_tensor(SeededRng& rng, const Shape& shape, double sigma) {
  if (!(sigma >= 0.0)) throw ContractError("gaussian_tensor: sigma must be >= 0, got " + std::to_string(sigma));
  Tensor t(shape, 0.0);
  if (sigma == 0.0) return t;
  for (auto& x : t.values()) x = sigma * rng.normal();
  return t;
}

}  // namespace mupt
