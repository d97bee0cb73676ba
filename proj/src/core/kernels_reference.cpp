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


#include <cmath>
#include <limits>

#include "mupt/core/error.hpp"
#include "mupt/core/kernels.hpp"

namespace mupt::kernels::reference {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool trans_a,
          bool trans_b, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        double av = trans_a ? a[p * m + i] : a[i * k + p];
        double bv = trans_b ? b[j * k + p] : b[p * n + j];
        s += av * bv;
      }
      c[i * n + j] = s;
    }
  }
}

void softmax_rows(const double* x, const std::uint8_t* keep, std::size_t keep_rows, double* y, std::size_t rows,
                  std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
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
    if (!any) throw NumericError("degenerate distribution support");
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
}

void softmax_rows_backward(const double* y, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0;
    for (std::size_t j = 0; j < cols; ++j) dot += y[r * cols + j] * dy[r * cols + j];
    for (std::size_t j = 0; j < cols; ++j) dx[r * cols + j] += y[r * cols + j] * (dy[r * cols + j] - dot);
  }
}

void rms_norm_rows(const double* x, const double* gain, double* y, std::size_t rows, std::size_t cols, double eps) {
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t j = 0; j < cols; ++j) ss += x[r * cols + j] * x[r * cols + j];
    double denom = std::sqrt(ss / static_cast<double>(cols) + eps);
    for (std::size_t j = 0; j < cols; ++j) {
      // zero input with eps == 0 is defined as zero output
      y[r * cols + j] = denom > 0.0 ? gain[j] * x[r * cols + j] / denom : 0.0;
    }
  }
}

}  // namespace mupt::kernels::reference
