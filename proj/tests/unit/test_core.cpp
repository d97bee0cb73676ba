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


#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mupt/core/autograd.hpp"
#include "mupt/core/error.hpp"
#include "mupt/core/grad_check.hpp"
#include "mupt/core/kernels.hpp"
#include "mupt/core/rng.hpp"
#include "mupt/core/tensor.hpp"

using namespace mupt;

namespace {

Tensor random_tensor(SeededRng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("softmax examples") {
  Tensor y = softmax_rows(Tensor::matrix(1, 2, {0.0, 0.0}));
  CHECK(y[0] == 0.5);
  CHECK(y[1] == 0.5);

  y = softmax_rows(Tensor::matrix(1, 3, {1000.0, 1000.0, 1000.0}));
  for (int k = 0; k < 3; ++k) CHECK(y[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // e^x / sum e^x evaluated by hand: 1/(1+3), 3/(1+3)
  y = softmax_rows(Tensor::matrix(1, 2, {std::log(1.0), std::log(3.0)}));
  CHECK(std::abs(y[0] - 0.25) < 1e-15);
  CHECK(std::abs(y[1] - 0.75) < 1e-15);
}

TEST_CASE("softmax masks and degenerate rows") {
  RowMask m = RowMask::off_diagonal(3);
  Tensor x = Tensor::matrix(3, 3, {5.0, 0.0, std::log(3.0), 0.0, 9.0, 0.0, 1.0, 1.0, -7.0});
  Tensor y = softmax_rows(x, &m);
  CHECK(y.at(0, 0) == 0.0);
  CHECK(std::abs(y.at(0, 1) - 0.25) < 1e-15);
  CHECK(std::abs(y.at(0, 2) - 0.75) < 1e-15);
  CHECK(y.at(1, 1) == 0.0);
  CHECK(y.at(2, 2) == 0.0);

  RowMask none;
  none.rows = 1;
  none.cols = 2;
  none.keep = {1, 0};
  RowMask all_off = none;
  all_off.keep = {0, 0};
  CHECK_THROWS_WITH_AS(softmax_rows(Tensor::matrix(1, 2, {1.0, 2.0}), &all_off), "degenerate distribution support",
                       NumericError);
}

TEST_CASE("softmax rows sum to one, including large logits") {
  SeededRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(40);
    const double mag = (trial % 4 == 0) ? 1000.0 : 10.0;
    Tensor x = random_tensor(rng, {rows, cols}, -mag, mag);
    Tensor y = softmax_rows(x);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        CHECK(y.at(i, j) >= 0.0);
        s += y.at(i, j);
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("rms_norm examples") {
  Tensor ones(Shape{5}, 1.0);
  Tensor y = rms_norm(ones, ones, 0.0);
  for (double v : y.values()) CHECK(v == 1.0);

  Tensor zeros(Shape{4}, 0.0);
  Tensor g = Tensor::vector({0.3, -2.0, 7.0, 1.0});
  y = rms_norm(zeros, g, 1e-6);
  for (double v : y.values()) CHECK(v == 0.0);

  y = rms_norm(Tensor::vector({3.0, 4.0}), Tensor::vector({1.0, 1.0}), 0.0);
  CHECK(std::abs(y[0] - 3.0 / std::sqrt(12.5)) < 1e-15);
  CHECK(std::abs(y[1] - 4.0 / std::sqrt(12.5)) < 1e-15);
  CHECK(y[0] == doctest::Approx(0.8485).epsilon(1e-4));
  CHECK(y[1] == doctest::Approx(1.1314).epsilon(1e-4));

  CHECK_THROWS_AS(rms_norm(Tensor::vector({1.0, 2.0}), Tensor::vector({1.0}), 1e-6), ShapeError);
}

TEST_CASE("reverse_grad examples") {
  {
    Tape tape;
    Var w = tape.parameter(Tensor::vector({1.0, -2.0}));
    Var loss = sum(mul(w, w));
    auto g = reverse_grad(loss, std::vector<Var>{w});
    CHECK(g[0][0] == 2.0);
    CHECK(g[0][1] == -4.0);
  }
  {
    Tape tape;
    Var w = tape.parameter(Tensor::vector({1.0, -2.0}));
    Var c = tape.constant(Tensor::scalar(3.5));
    auto g = reverse_grad(c, std::vector<Var>{w});
    CHECK(g[0][0] == 0.0);
    CHECK(g[0][1] == 0.0);
  }
  {
    Tape tape;
    Var w = tape.parameter(Tensor::vector({1.0, -2.0}));
    CHECK_THROWS_AS(reverse_grad(mul(w, w), std::vector<Var>{w}), ContractError);
  }
}

TEST_CASE("finite_diff_check on analytic cases") {
  SeededRng rng(3);
  // f(w) = sum(a * w^2): analytic gradient 2 a w
  Tensor a = random_tensor(rng, {3, 4}, 0.5, 2.0);
  std::vector<NamedTensor> params = {{"w", random_tensor(rng, {3, 4})}};
  auto quad = [&](Tape& tape, std::span<const Var> p) { return sum(mul(tape.constant(a), mul(p[0], p[0]))); };
  auto rep = finite_diff_check(quad, params);
  CHECK(rep.passed());
  CHECK(rep.max_rel_error() <= 1e-9);

  auto linear = [&](Tape& tape, std::span<const Var> p) { return sum(mul(tape.constant(a), p[0])); };
  rep = finite_diff_check(linear, params);
  CHECK(rep.max_rel_error() <= 1e-10);

  GradCheckOptions bad;
  bad.step = 1e-2;
  CHECK_THROWS_AS(finite_diff_check(quad, params, bad), ContractError);

  int calls = 0;
  auto flaky = [&](Tape&, std::span<const Var> p) {
    ++calls;
    return scale(sum(mul(p[0], p[0])), 1.0 + 1e-3 * calls);
  };
  CHECK_THROWS_WITH_AS(finite_diff_check(flaky, params), "finite_diff_check: loss function is not deterministic",
                       ContractError);
}

// Random compositions of every primitive, checked against central differences.
TEST_CASE("reverse_grad matches finite differences on random compositions") {
  constexpr std::size_t n = 4, m = 5, vocab = 6, buckets = 4;
  std::size_t total_checked = 0;
  for (std::uint64_t trial = 0; trial < 120; ++trial) {
    SeededRng rng(mix_seed(77, trial));
    std::vector<NamedTensor> params = {
        {"A", random_tensor(rng, {n, m})},          {"B", random_tensor(rng, {m, m}, -0.6, 0.6)},
        {"g", random_tensor(rng, {m}, 0.5, 1.5)},   {"bias", random_tensor(rng, {m})},
        {"table", random_tensor(rng, {vocab, m})},  {"P", random_tensor(rng, {2, buckets})},
        {"W", random_tensor(rng, {m, vocab}, -0.5, 0.5)}};
    std::vector<int> ids(n);
    for (auto& id : ids) id = static_cast<int>(rng.below(vocab));
    const std::size_t depth = 2 + rng.below(5);
    std::vector<int> ops(depth);
    for (auto& o : ops) o = static_cast<int>(rng.below(10));
    const bool ce_head = rng.below(2) == 1;
    const double c = rng.uniform(-1.5, 1.5);

    LossBuilder loss = [&](Tape&, std::span<const Var> p) {
      Var x = (trial % 2 == 0) ? gather_rows(p[4], ids) : p[0];
      RowMask mask = RowMask::off_diagonal(n);
      for (int op : ops) {
        switch (op) {
          case 0: x = add(x, p[0]); break;
          case 1: x = sub(x, scale(p[0], 0.5)); break;
          case 2: x = mul(x, p[0]); break;
          case 3: x = add_bias(scale(x, c), p[3]); break;
          case 4: x = matmul(x, p[1]); break;
          case 5: x = matmul(x, p[1], false, true); break;
          case 6: x = softmax_rows(x); break;
          case 7: x = rms_norm_rows(x, p[2], 1e-6); break;
          case 8: x = matmul(softmax_rows(matmul(x, p[0], false, true), &mask), x); break;
          default: x = sum_leading(matmul(relative_position_bias(p[5], n), x)); break;
        }
      }
      if (ce_head) {
        const std::vector<int> targets = {1, 4};
        const std::vector<int> positions = {0, 2};
        return masked_cross_entropy(matmul(x, p[6]), targets, positions);
      }
      return sum(mul(x, x));
    };
    auto rep = finite_diff_check(loss, params);
    for (const auto& t : rep.tensors) total_checked += t.checked;
    INFO("trial " << trial);
    CHECK(rep.passed());
  }
  CHECK(total_checked > 1000);
}

TEST_CASE("gaussian_tensor") {
  SeededRng rng(1);
  Tensor z = gaussian_tensor(rng, {3, 3}, 0.0);
  for (double v : z.values()) CHECK(v == 0.0);

  // 65536 samples: the sample variance has relative sd sqrt(2/65536) ~ 0.55%
  Tensor t = gaussian_tensor(rng, {256, 256}, 1.0 / 16.0);
  const double var = variance(t);
  CHECK(var >= 0.9 / 256.0);
  CHECK(var <= 1.1 / 256.0);

  SeededRng a(42), b(42);
  CHECK(bit_equal(gaussian_tensor(a, {17, 5}, 0.3), gaussian_tensor(b, {17, 5}, 0.3)));
  CHECK_THROWS_AS(gaussian_tensor(rng, {2}, -1.0), ContractError);
}

TEST_CASE("rng stream is fixed by the standard engine") {
  // The 10000th output of a default-seeded mt19937_64 is fixed by [rand.predef].
  SeededRng r(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = r.next_u64();
  CHECK(v == 9981545732273789042ULL);
  CHECK(r.position() == 10000);

  SeededRng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(7) < 7);
  }
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(SeededRng(3).fork(4).next_u64() == SeededRng(mix_seed(3, 4)).next_u64());
}

TEST_CASE("parallel kernels are bit-identical to the reference kernels") {
  SeededRng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng.below(40), n = 1 + rng.below(40), k = 1 + rng.below(70);
    const bool ta = rng.below(2) == 1, tb = rng.below(2) == 1, acc = rng.below(2) == 1;
    Tensor a = random_tensor(rng, {m * k}), b = random_tensor(rng, {k * n}), c0 = random_tensor(rng, {m * n});
    Tensor c_ref = c0, c_par = c0;
    kernels::reference::gemm(a.data(), b.data(), c_ref.data(), m, n, k, ta, tb, acc);
    for (int threads : {1, 3}) {
      kernels::set_threads(threads);
      Tensor c = c0;
      kernels::parallel::gemm(a.data(), b.data(), c.data(), m, n, k, ta, tb, acc);
      CHECK(bit_equal(c, c_ref));
      c_par = c;
    }
    kernels::set_threads(1);

    Tensor x = random_tensor(rng, {m, n}, -30.0, 30.0), gain = random_tensor(rng, {n});
    std::vector<std::uint8_t> keep(m * n, 1);
    for (std::size_t i = 0; i < m; ++i) keep[i * n + rng.below(n)] = 1;
    for (std::size_t i = 0; i < m * n; ++i) {
      if (rng.below(3) == 0) keep[i] = 0;
    }
    for (std::size_t i = 0; i < m; ++i) keep[i * n] = 1;
    Tensor y1({m, n}), y2({m, n});
    kernels::reference::softmax_rows(x.data(), keep.data(), m, y1.data(), m, n);
    kernels::parallel::softmax_rows(x.data(), keep.data(), m, y2.data(), m, n);
    CHECK(bit_equal(y1, y2));
    Tensor dy = random_tensor(rng, {m, n}), d1({m, n}), d2({m, n});
    kernels::reference::softmax_rows_backward(y1.data(), dy.data(), d1.data(), m, n);
    kernels::parallel::softmax_rows_backward(y1.data(), dy.data(), d2.data(), m, n);
    CHECK(bit_equal(d1, d2));
    kernels::reference::rms_norm_rows(x.data(), gain.data(), y1.data(), m, n, 1e-6);
    kernels::parallel::rms_norm_rows(x.data(), gain.data(), y2.data(), m, n, 1e-6);
    CHECK(bit_equal(y1, y2));
  }
}

TEST_CASE("gemm reference agrees with a scalar triple loop") {
  SeededRng rng(5);
  const std::size_t m = 7, n = 5, k = 9;
  Tensor a = random_tensor(rng, {k, m}), b = random_tensor(rng, {n, k});
  Tensor c({m, n});
  kernels::reference::gemm(a.data(), b.data(), c.data(), m, n, k, true, true, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += a[l * m + i] * b[j * k + l];
      CHECK(std::abs(c.at(i, j) - s) <= 1e-14);
    }
  }
}

TEST_CASE("tensor basics") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(shape_size({2, 3, 4}) == 24);
  CHECK(shape_str({2, 3}) == "[2x3]");
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{2}, std::vector<double>{1.0}), ShapeError);
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
  CHECK_THROWS_AS(t.require_finite("t"), NumericError);
  CHECK(Tensor::scalar(4.0).item() == 4.0);
}
