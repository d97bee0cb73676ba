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


#include <omp.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mupt/core/error.hpp"
#include "mupt/core/kernels.hpp"

namespace mupt::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

std::vector<double> transpose(const double* b, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = b[i * cols + j];
  }
  return t;
}
}  // namespace

void set_threads(int n) { omp_set_num_threads(n < 1 ? 1 : n); }
int threads() { return omp_get_max_threads(); }

namespace parallel {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool trans_a,
          bool trans_b, bool accumulate) {
  std::vector<double> bt;
  if (trans_b) {
    // B is n x k; make it k x n so the inner loop runs over contiguous j.
    bt = transpose(b, n, k);
    b = bt.data();
  }
  const bool par = m * n * k >= kParallelWork && m > 1;
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static) if (par)
  for (long ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* ci = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double av = trans_a ? a[p * m + i] : a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void softmax_rows(const double* x, const std::uint8_t* keep, std::size_t keep_rows, double* y, std::size_t rows,
                  std::size_t cols) {
  const bool par = rows * cols >= kParallelWork / 8;
  const long nrows = static_cast<long>(rows);
  bool degenerate = false;
#pragma omp parallel for schedule(static) if (par) reduction(|| : degenerate)
  for (long rr = 0; rr < nrows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    const std::uint8_t* kr = keep ? keep + (r % keep_rows) * cols : nullptr;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < cols; ++j) {
      if (kr && !kr[j]) continue;
      any = true;
      if (xr[j] > mx) mx = xr[j];
    }
    if (!any) {
      degenerate = true;
      continue;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (kr && !kr[j]) {
        yr[j] = 0.0;
        continue;
      }
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= s;
  }
  if (degenerate) throw NumericError("degenerate distribution support");
}

void softmax_rows_backward(const double* y, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
  const bool par = rows * cols >= kParallelWork / 8;
  const long nrows = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long rr = 0; rr < nrows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double* yr = y + r * cols;
    const double* dyr = dy + r * cols;
    double* dxr = dx + r * cols;
    double dot = 0.0;
    for (std::size_t j = 0; j < cols; ++j) dot += yr[j] * dyr[j];
    for (std::size_t j = 0; j < cols; ++j) dxr[j] += yr[j] * (dyr[j] - dot);
  }
}

void rms_norm_rows(const double* x, const double* gain, double* y, std::size_t rows, std::size_t cols, double eps) {
  const bool par = rows * cols >= kParallelWork / 8;
  const long nrows = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long rr = 0; rr < nrows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    double ss = 0.0;
    for (std::size_t j = 0; j < cols; ++j) ss += xr[j] * xr[j];
    const double denom = std::sqrt(ss / static_cast<double>(cols) + eps);
    for (std::size_t j = 0; j < cols; ++j) yr[j] = denom > 0.0 ? gain[j] * xr[j] / denom : 0.0;
  }
}

}  // namespace parallel
}  // namespace mupt::kernels
