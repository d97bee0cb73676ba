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


// Reference (serial) against parallel kernels on shapes that occur in the model.
#include <benchmark/benchmark.h>

#include <vector>

#include "mupt/core/kernels.hpp"
#include "mupt/core/rng.hpp"

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  mupt::SeededRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const bool tb = state.range(3) != 0;
  const auto a = random_vec(m * k, 1), b = random_vec(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    if constexpr (Parallel) mupt::kernels::parallel::gemm(a.data(), b.data(), c.data(), m, n, k, false, tb, false);
    else mupt::kernels::reference::gemm(a.data(), b.data(), c.data(), m, n, k, false, tb, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<long>(state.iterations() * m * n * k));
}

template <bool Parallel>
void BM_softmax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  const auto x = random_vec(rows * cols, 3);
  std::vector<double> y(rows * cols);
  for (auto _ : state) {
    if constexpr (Parallel) mupt::kernels::parallel::softmax_rows(x.data(), nullptr, 0, y.data(), rows, cols);
    else mupt::kernels::reference::softmax_rows(x.data(), nullptr, 0, y.data(), rows, cols);
    benchmark::DoNotOptimize(y.data());
  }
}

// (m, n, k, trans_b): token-by-width projections, readout, and head logits.
void gemm_shapes(benchmark::internal::Benchmark* b) {
  b->Args({32, 16, 256, 0})->Args({32, 259, 256, 0})->Args({32, 256, 259, 1})->Args({256, 259, 32, 0})->Args({32, 32, 16, 1});
}

}  // namespace

BENCHMARK(BM_gemm<false>)->Apply(gemm_shapes)->Name("gemm/reference");
BENCHMARK(BM_gemm<true>)->Apply(gemm_shapes)->Name("gemm/parallel");
BENCHMARK(BM_softmax<false>)->Args({32, 256})->Args({256, 259})->Name("softmax/reference");
BENCHMARK(BM_softmax<true>)->Args({32, 256})->Args({256, 259})->Name("softmax/parallel");

BENCHMARK_MAIN();
