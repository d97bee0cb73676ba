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

#include <cstddef>
#include <cstdint>

// Dense kernels used by the autograd ops.
//
// Two implementations exist with identical signatures. `reference` is the
// naive serial form kept as the test oracle. `parallel` is the production
// form: row-parallel under OpenMP, cache-friendly loop order, vectorizable
// inner loops. Every output element is reduced in the same order in both, so
// results are bit-identical to each other and independent of the thread count.
//
// gemm computes C[m x n] = op(A) * op(B) (or C += ... when accumulate), where
// op(A) is m x k and op(B) is k x n. With trans_a, A is stored k x m; with
// trans_b, B is stored n x k.

namespace mupt::kernels {

namespace reference {
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool trans_a,
          bool trans_b, bool accumulate);
void softmax_rows(const double* x, const std::uint8_t* keep, std::size_t keep_rows, double* y, std::size_t rows,
                  std::size_t cols);
void softmax_rows_backward(const double* y, const double* dy, double* dx, std::size_t rows, std::size_t cols);
void rms_norm_rows(const double* x, const double* gain, double* y, std::size_t rows, std::size_t cols, double eps);
}  // namespace reference

namespace parallel {
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool trans_a,
          bool trans_b, bool accumulate);
void softmax_rows(const double* x, const std::uint8_t* keep, std::size_t keep_rows, double* y, std::size_t rows,
                  std::size_t cols);
void softmax_rows_backward(const double* y, const double* dy, double* dx, std::size_t rows, std::size_t cols);
void rms_norm_rows(const double* x, const double* gain, double* y, std::size_t rows, std::size_t cols, double eps);
}  // namespace parallel

using parallel::gemm;
using parallel::rms_norm_rows;
using parallel::softmax_rows;
using parallel::softmax_rows_backward;

void set_threads(int n);
int threads();

}  // namespace mupt::kernels
