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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "mupt/core/error.hpp"
#include "mupt/core/grad_check.hpp"
#include "mupt/core/rng.hpp"
#include "mupt/diag/equivalence.hpp"
#include "mupt/model/checkpoint.hpp"
#include "mupt/model/config.hpp"
#include "mupt/model/mfvi.hpp"
#include "mupt/model/params.hpp"

using namespace mupt;

namespace {

PTConfig small_config(std::size_t N, std::size_t r, std::size_t C, std::size_t M, std::size_t vocab = 259) {
  PTConfig c;
  c.width = N;
  c.rank = r;
  c.channels = C;
  c.topics = M;
  c.vocab_size = vocab;
  c.pos_bias = false;
  return c;
}

std::vector<int> random_tokens(SeededRng& rng, std::size_t n, std::size_t vocab) {
  std::vector<int> t(n);
  for (auto& x : t) x = static_cast<int>(rng.below(vocab));
  return t;
}

MFVIState random_state(SeededRng& rng, std::size_t n, const PTConfig& c) {
  MFVIState s{Tensor({n, c.width}), Tensor({c.channels, n, n}), Tensor({n, c.topics})};
  for (double& v : s.qz.values()) v = rng.uniform(-2.0, 2.0);
  for (double& v : s.qh.values()) v = rng.uniform(-2.0, 2.0);
  for (double& v : s.qg.values()) v = rng.uniform(-2.0, 2.0);
  s.qz = softmax_rows(s.qz);
  s.qg = softmax_rows(s.qg);
  RowMask mask = RowMask::off_diagonal(n);
  s.qh = softmax_rows(s.qh, &mask);
  return s;
}

InfoWeights random_weights(SeededRng& rng) {
  std::array<double, 6> a;
  for (double& v : a) v = rng.uniform(0.5, 1.5);
  return InfoWeights::from_array(a);
}

void check_normalized(const MFVIState& s, double tol) {
  const std::size_t n = s.length();
  for (std::size_t i = 0; i < n; ++i) {
    double sz = 0.0, sg = 0.0;
    for (std::size_t a = 0; a < s.qz.dim(1); ++a) {
      REQUIRE(s.qz.at(i, a) >= 0.0);
      sz += s.qz.at(i, a);
    }
    for (std::size_t g = 0; g < s.qg.dim(1); ++g) {
      REQUIRE(s.qg.at(i, g) >= 0.0);
      sg += s.qg.at(i, g);
    }
    CHECK(std::abs(sz - 1.0) <= tol);
    CHECK(std::abs(sg - 1.0) <= tol);
    for (std::size_t c = 0; c < s.qh.dim(0); ++c) {
      double sh = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        REQUIRE(s.qh.at(c, i, j) >= 0.0);
        sh += s.qh.at(c, i, j);
      }
      CHECK(s.qh.at(c, i, i) == 0.0);
      CHECK(std::abs(sh - 1.0) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("init_mfvi examples") {
  PTConfig c = small_config(4, 2, 1, 4);
  ModelParams p = zero_model_params(c);
  std::vector<int> tokens = {3, 1, 4};
  MFVIState s = init_mfvi(tokens, p, c, InfoWeights{});
  for (double v : s.qz.values()) CHECK(v == 0.25);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(s.qh.at(0, i, j) == (i == j ? 0.0 : 0.5));
  }
  for (double v : s.qg.values()) CHECK(v == 0.25);

  PTConfig h = small_config(2, 1, 1, 2, 2);
  ModelParams ph = zero_model_params(h);
  ph.S = Tensor::matrix(2, 2, {std::log(1.0), std::log(3.0), 0.0, 0.0});
  std::vector<int> t2 = {0, 1};
  MFVIState s2 = init_mfvi(t2, ph, h, InfoWeights{});
  CHECK(std::abs(s2.qz.at(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(s2.qz.at(0, 1) - 0.75) < 1e-15);

  std::vector<int> one = {2};
  CHECK_THROWS_WITH_AS(init_mfvi(one, p, c, InfoWeights{}), "head selection undefined for single-token sequence",
                       ContractError);
}

TEST_CASE("attention_logits examples") {
  PTConfig c = small_config(2, 1, 1, 2, 4);
  ModelParams p = zero_model_params(c);
  MFVIState s{Tensor::matrix(2, 2, {0.6, 0.4, 0.2, 0.8}), Tensor({1, 2, 2}), Tensor({2, 2}, 0.5)};
  Tensor f = attention_logits(s, p, c, 0);
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(1, 0) == 0.0);
  CHECK(std::isinf(f.at(0, 0)));

  // N_i = (1.2, 0.8), U = [0.5, -0.5]^T, N_j = (0.4, 1.6), V = [1, 0]^T
  p.U = Tensor({1, 2, 1}, std::vector<double>{0.5, -0.5});
  p.V = Tensor({1, 2, 1}, std::vector<double>{1.0, 0.0});
  f = attention_logits(s, p, c, 0);
  // dense-T oracle: T = U V^T, (1/r) sum_ab N_i(a) T_ab N_j(b)
  const double ni[2] = {1.2, 0.8}, nj[2] = {0.4, 1.6}, u[2] = {0.5, -0.5}, v[2] = {1.0, 0.0};
  double dense = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) dense += ni[a] * (u[a] * v[b]) * nj[b];
  }
  CHECK(std::abs(dense - 0.08) < 1e-15);
  CHECK(std::abs(f.at(0, 1) - dense) < 1e-15);

  // r = 2 with a zero second column: same product, half the logit
  PTConfig c2 = c;
  c2.rank = 2;
  ModelParams p2 = zero_model_params(c2);
  p2.U = Tensor({1, 2, 2}, std::vector<double>{0.5, 0.0, -0.5, 0.0});
  p2.V = Tensor({1, 2, 2}, std::vector<double>{1.0, 0.0, 0.0, 0.0});
  Tensor f2 = attention_logits(s, p2, c2, 0);
  CHECK(f2.at(0, 1) == f.at(0, 1) / 2.0);
  CHECK(f2.at(1, 0) == f.at(1, 0) / 2.0);
}

TEST_CASE("update_heads examples") {
  PTConfig c = small_config(4, 2, 2, 4);
  SeededRng rng(4);
  ModelParams p = init_model_params(c, rng);
  MFVIState s = random_state(rng, 3, c);

  InfoWeights w0;
  w0.attn = 0.0;
  Tensor qh = update_heads(s, p, c, w0);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(qh.at(ch, i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
    }
  }

  ModelParams z = zero_model_params(c);
  qh = update_heads(s, z, c, InfoWeights{});
  for (std::size_t i = 0; i < 3; ++i) CHECK(qh.at(1, i, (i + 1) % 3) == 0.5);

  // F of token 0: bias only, row [-, 0, ln 3]
  PTConfig cb = c;
  cb.channels = 1;
  cb.pos_bias = true;
  cb.pos_buckets = 8;
  ModelParams pb = zero_model_params(cb);
  pb.P_rel.at(0, relative_bucket(-1, 8)) = 0.0;
  pb.P_rel.at(0, relative_bucket(-2, 8)) = std::log(3.0);
  MFVIState sb = random_state(rng, 3, cb);
  qh = update_heads(sb, pb, cb, InfoWeights{});
  CHECK(qh.at(0, 0, 0) == 0.0);
  CHECK(std::abs(qh.at(0, 0, 1) - 0.25) < 1e-15);
  CHECK(std::abs(qh.at(0, 0, 2) - 0.75) < 1e-15);
}

TEST_CASE("update_topics examples") {
  PTConfig c = small_config(2, 1, 1, 2, 4);
  ModelParams p = zero_model_params(c);
  MFVIState s{Tensor::matrix(2, 2, {0.75, 0.25, 0.5, 0.5}), Tensor({1, 2, 2}), Tensor({2, 2}, 0.5)};
  Tensor qg = update_topics(s, p, c, InfoWeights{});
  for (double v : qg.values()) CHECK(v == 0.5);

  p.B = Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
  qg = update_topics(s, p, c, InfoWeights{});
  CHECK(qg.at(1, 0) == 0.5);

  p.B = Tensor::matrix(2, 2, {std::log(2.0), 0.0, 0.0, std::log(2.0)});
  qg = update_topics(s, p, c, InfoWeights{});
  // logits (1.5 ln 2, 0.5 ln 2): 2^1.5 / (2^1.5 + 2^0.5) = 2/3
  const double l0 = 1.5 * std::log(2.0), l1 = 0.5 * std::log(2.0);
  CHECK(std::abs(qg.at(0, 0) - std::exp(l0) / (std::exp(l0) + std::exp(l1))) < 1e-15);
  CHECK(qg.at(0, 0) == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(qg.at(0, 1) == doctest::Approx(0.3333).epsilon(1e-4));
}

TEST_CASE("update_z examples") {
  PTConfig c = small_config(4, 2, 2, 4);
  SeededRng rng(8);
  std::vector<int> tokens = random_tokens(rng, 5, c.vocab_size);
  MFVIState s = random_state(rng, 5, c);
  Tensor qz = update_z(tokens, s, zero_model_params(c), c, InfoWeights{});
  for (double v : qz.values()) CHECK(v == 0.25);

  ModelParams p = init_model_params(c, rng);
  InfoWeights unary_only;
  unary_only.tern_dep = unary_only.tern_head = unary_only.binary = 0.0;
  MFVIState init = init_mfvi(tokens, p, c, unary_only);
  qz = update_z(tokens, s, p, c, unary_only);
  CHECK(max_abs_diff(qz, init.qz) <= 1e-15);

  // one update against the dense-T tau-literal gradient, divided by tau
  for (int trial = 0; trial < 5; ++trial) {
    ModelParams pr = init_model_params(c, rng);
    InfoWeights w = random_weights(rng);
    MFVIState sr = random_state(rng, 5, c);
    Tensor lit = tau_literal_z_gradient(tokens, sr, pr, c, w);
    for (double& v : lit.values()) v /= c.temperature();
    CHECK(relative_deviation(z_logits(tokens, sr, pr, c, w), lit) <= 1e-12);
    CHECK(relative_deviation(update_z(tokens, sr, pr, c, w), softmax_rows(lit)) <= 1e-12);
  }
}

TEST_CASE("run_mfvi composes the update ops") {
  PTConfig c = small_config(4, 2, 2, 4);
  c.mfvi_iters = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);

  SeededRng rng(12);
  std::vector<int> tokens = random_tokens(rng, 6, c.vocab_size);
  for (std::size_t iters : {1u, 3u}) {
    c.mfvi_iters = iters;
    ModelParams p = init_model_params(c, rng);
    InfoWeights w = random_weights(rng);
    MFVIState s = init_mfvi(tokens, p, c, w);
    for (std::size_t k = 0; k < iters; ++k) {
      MFVIState next = s;
      next.qh = update_heads(s, p, c, w);
      next.qg = update_topics(s, p, c, w);
      next.qz = update_z(tokens, next, p, c, w);
      s = next;
    }
    MFVIState r = run_mfvi(tokens, p, w, c);
    CHECK(bit_equal(r.qz, s.qz));
    CHECK(bit_equal(r.qh, s.qh));
    CHECK(bit_equal(r.qg, s.qg));
  }
}

TEST_CASE("uniform is a fixed point of the zero model") {
  for (std::size_t iters : {1u, 4u, 9u}) {
    PTConfig c = small_config(8, 2, 2, 4);
    c.mfvi_iters = iters;
    std::vector<int> tokens = {1, 2, 3, 4};
    MFVIState s = run_mfvi(tokens, zero_model_params(c), InfoWeights{}, c);
    for (double v : s.qz.values()) CHECK(v == 0.125);
    for (double v : s.qg.values()) CHECK(v == 0.25);
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.qh.at(1, i, (i + 2) % 4) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("mlm_logits examples") {
  PTConfig c = small_config(2, 1, 1, 2, 2);
  ModelParams p = zero_model_params(c);
  MFVIState s{Tensor::matrix(2, 2, {0.6, 0.4, 0.5, 0.5}), Tensor({1, 2, 2}), Tensor({2, 2}, 0.5)};
  Tensor l = mlm_logits(s, p, c);
  for (double v : l.values()) CHECK(v == 0.0);

  p.gamma = Tensor::vector({1.0, 1.0});
  p.W_out = Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
  c.norm_eps = 0.0;
  l = mlm_logits(s, p, c);
  // N = (1.2, 0.8): rms = sqrt(1.04)
  CHECK(std::abs(l.at(0, 0) - 1.2 / std::sqrt(1.04)) < 1e-15);
  CHECK(std::abs(l.at(0, 1) - 0.8 / std::sqrt(1.04)) < 1e-15);
  CHECK(l.at(0, 0) == doctest::Approx(1.1767).epsilon(1e-4));
  CHECK(l.at(0, 1) == doctest::Approx(0.7845).epsilon(1e-4));

  // uniform row: feature = gamma / sqrt(1 + eps)
  c.norm_eps = 1e-6;
  p.gamma = Tensor::vector({0.7, -1.3});
  l = mlm_logits(s, p, c);
  CHECK(std::abs(l.at(1, 0) - 0.7 / std::sqrt(1.0 + 1e-6)) < 1e-15);
  CHECK(std::abs(l.at(1, 1) + 1.3 / std::sqrt(1.0 + 1e-6)) < 1e-15);
}

TEST_CASE("masked_ce_loss examples") {
  Tensor uniform({3, 259}, 0.0);
  std::vector<int> targets = {5, 9}, positions = {0, 2};
  CHECK(std::abs(masked_ce_loss(uniform, targets, positions) - std::log(259.0)) < 1e-13);

  Tensor peaked({3, 259}, 0.0);
  peaked.at(0, 5) = 60.0;
  peaked.at(2, 9) = 60.0;
  CHECK(masked_ce_loss(peaked, targets, positions) < 1e-20);

  // -log sigmoid(a) = L  =>  a = -log(e^L - 1)
  Tensor two({2, 2}, 0.0);
  two.at(0, 0) = -std::log(std::exp(1.0) - 1.0);
  two.at(1, 0) = -std::log(std::exp(3.0) - 1.0);
  std::vector<int> t2 = {0, 0}, p2 = {0, 1};
  CHECK(std::abs(masked_ce_loss(two, t2, p2) - 2.0) < 1e-14);

  std::vector<int> none;
  CHECK_THROWS_AS(masked_ce_loss(two, none, none), ContractError);
}

TEST_CASE("posteriors stay normalized over random models") {
  std::size_t models = 0;
  for (std::size_t N : {4u, 8u, 16u, 32u}) {
    for (std::uint64_t seed = 0; seed < 26; ++seed) {
      SeededRng rng(mix_seed(N, seed));
      const bool rank_paradigm = seed % 2 == 1;
      PTConfig c = small_config(N, rank_paradigm ? N / 2 : 2, rank_paradigm ? 2 : N / 4, N / 2);
      c.mfvi_iters = 1 + rng.below(4);
      c.pos_bias = seed % 3 == 0;
      ModelParams p = init_model_params(c, rng);
      if (c.pos_bias) p.P_rel = gaussian_tensor(rng, p.P_rel.shape(), 1.0);
      std::vector<int> tokens = random_tokens(rng, 2 + rng.below(10), c.vocab_size);
      InfoWeights w = random_weights(rng);
      check_normalized(init_mfvi(tokens, p, c, w), 1e-9);
      check_normalized(run_mfvi(tokens, p, w, c), 1e-9);
      ++models;
    }
  }
  CHECK(models >= 100);
}

TEST_CASE("tau cancellation across temperatures") {
  struct Geo {
    std::size_t N, r, C;
  };
  // tau = N / r in {1, 2, 8, 24}, channel- and rank-heavy shapes
  const Geo geos[] = {{8, 8, 2}, {8, 4, 2}, {8, 1, 4}, {24, 1, 6}, {16, 16, 1}, {16, 8, 2}};
  for (const auto& g : geos) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      SeededRng rng(mix_seed(g.N * 100 + g.r, seed));
      PTConfig c = small_config(g.N, g.r, g.C, g.N / 2);
      ModelParams p = init_model_params(c, rng);
      InfoWeights w = random_weights(rng);
      std::vector<int> tokens = random_tokens(rng, 7, c.vocab_size);
      MFVIState s = random_state(rng, 7, c);
      Tensor lit = tau_literal_z_gradient(tokens, s, p, c, w);
      for (double& v : lit.values()) v /= c.temperature();
      INFO("N " << g.N << " r " << g.r << " seed " << seed);
      CHECK(relative_deviation(z_logits(tokens, s, p, c, w), lit) <= 1e-12);
    }
  }
}

TEST_CASE("unary-only logits scale linearly; argmax is invariant") {
  PTConfig c = small_config(16, 4, 2, 8);
  SeededRng rng(30);
  ModelParams p = init_model_params(c, rng);
  InfoWeights w;
  w.tern_dep = w.tern_head = w.binary = 0.0;
  std::vector<int> tokens = random_tokens(rng, 6, c.vocab_size);
  MFVIState s = run_mfvi(tokens, p, w, c);
  Tensor base = z_logits(tokens, s, p, c, w);
  for (double kappa : {0.1, 0.5, 2.0, 7.0}) {
    ModelParams pk = p;
    for (auto* t : {&pk.S, &pk.B, &pk.U, &pk.V}) {
      for (double& v : t->values()) v *= kappa;
    }
    MFVIState sk = run_mfvi(tokens, pk, w, c);
    Tensor lk = z_logits(tokens, sk, pk, c, w);
    Tensor scaled = base;
    for (double& v : scaled.values()) v *= kappa;
    CHECK(relative_deviation(lk, scaled) <= 1e-12);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto row = [&](const Tensor& q) {
        const double* r = q.data() + i * c.width;
        return std::max_element(r, r + c.width) - r;
      };
      CHECK(row(sk.qz) == row(s.qz));
    }
  }
}

TEST_CASE("position-free model is permutation equivariant") {
  PTConfig c = small_config(8, 2, 2, 4);
  c.mfvi_iters = 3;
  SeededRng rng(31);
  ModelParams p = init_model_params(c, rng);
  InfoWeights w = random_weights(rng);
  const std::size_t n = 7;
  std::vector<int> tokens = random_tokens(rng, n, c.vocab_size);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<int> permuted(n);
  for (std::size_t i = 0; i < n; ++i) permuted[i] = tokens[perm[i]];

  MFVIState a = run_mfvi(tokens, p, w, c), b = run_mfvi(permuted, p, w, c);
  Tensor la = mlm_logits(a, p, c), lb = mlm_logits(b, p, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < c.width; ++k) worst = std::max(worst, std::abs(b.qz.at(i, k) - a.qz.at(perm[i], k)));
    for (std::size_t k = 0; k < c.topics; ++k) worst = std::max(worst, std::abs(b.qg.at(i, k) - a.qg.at(perm[i], k)));
    for (std::size_t k = 0; k < c.vocab_size; ++k) worst = std::max(worst, std::abs(lb.at(i, k) - la.at(perm[i], k)));
    for (std::size_t ch = 0; ch < c.channels; ++ch) {
      for (std::size_t j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(b.qh.at(ch, i, j) - a.qh.at(ch, perm[i], perm[j])));
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("full MLM loss gradient at width 16 matches finite differences") {
  PTConfig c = small_config(16, 4, 2, 8);
  c.mfvi_iters = 2;
  c.pos_bias = true;
  c.pos_buckets = 8;
  SeededRng rng(40);
  ModelParams p = init_model_params(c, rng);
  p.P_rel = gaussian_tensor(rng, p.P_rel.shape(), 0.5);
  p.b_out = gaussian_tensor(rng, p.b_out.shape(), 0.1);
  const std::vector<int> inputs = {10, 256, 30, 40, 256, 60};
  const std::vector<int> targets = {20, 50}, positions = {1, 4};
  std::vector<NamedTensor> named;
  p.for_each([&](std::string_view name, const Tensor& t) { named.push_back({std::string(name), t}); });
  LossBuilder loss = [&](Tape& tape, std::span<const Var> v) {
    ParamVars pv{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    return mlm_loss(tape, pv, c, InfoWeights{}, inputs, targets, positions);
  };
  GradCheckOptions opt;
  opt.max_coords_per_tensor = 64;
  auto rep = finite_diff_check(loss, named, opt);
  for (const auto& t : rep.tensors) {
    INFO(t.name << " worst " << t.worst_score);
    CHECK(t.failures == 0);
  }
  CHECK(rep.passed());
}

TEST_CASE("checkpoint round-trip and corruption") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mupt_test_ckpt";
  fs::create_directories(dir);
  PTConfig c = small_config(8, 2, 2, 4);
  c.pos_bias = true;
  SeededRng rng(50);
  Checkpoint ck{c, init_model_params(c, rng), nlohmann::json{{"step", 7}}};
  ck.params.P_rel = gaussian_tensor(rng, ck.params.P_rel.shape(), 1.0);
  const fs::path path = dir / "a.ckpt";
  save_checkpoint(path, ck);
  Checkpoint back = load_checkpoint(path);
  for (auto name : ModelParams::kNames) CHECK(bit_equal(back.params.get(name), ck.params.get(name)));
  CHECK(to_json(back.config) == to_json(c));
  CHECK(back.extra["step"] == 7);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(dir / "trunc.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 13));
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), FormatError);
  try {
    load_checkpoint(dir / "trunc.ckpt");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }

  std::string bad = bytes;
  bad[2] = 'X';
  {
    std::ofstream out(dir / "magic.ckpt", std::ios::binary);
    out << bad;
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.ckpt"), FormatError);

  const std::string key = "\"format_version\":1";
  std::string ver = bytes;
  const auto pos = ver.find(key);
  REQUIRE(pos != std::string::npos);
  ver[pos + key.size() - 1] = '9';
  {
    std::ofstream out(dir / "version.ckpt", std::ios::binary);
    out << ver;
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "version.ckpt"), doctest::Contains("format_version"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("config validation and parameter shapes") {
  PTConfig c = small_config(8, 9, 2, 4);
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.rank = 2;
  c.validate();
  CHECK(c.temperature() == 4.0);
  CHECK(param_shape("U", c) == Shape{2, 8, 2});
  CHECK(param_shape("W_out", c) == Shape{8, 259});
  CHECK_THROWS_AS(param_shape("Q", c), ContractError);
  ModelParams p = zero_model_params(c);
  p.B = Tensor({3, 8});
  CHECK_THROWS_AS(validate_params(p, c), ShapeError);
  CHECK(pt_config_from_json(to_json(c)).rank == 2);
  CHECK(parse_paradigm(to_string(Paradigm::ScaleRank)) == Paradigm::ScaleRank);
}
