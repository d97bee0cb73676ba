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


#include "mupt/core/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mupt/core/error.hpp"
#include "mupt/core/kernels.hpp"

namespace mupt {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), false, {}, Tensor(), false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), true, {}, Tensor(), false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) throw ContractError("op mixes Vars from different tapes");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), needs, needs ? std::move(backward) : Backward{}, Tensor(), false});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  if (value(loss.id()).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_str(value(loss.id()).shape()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad(loss.id()).fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.has_grad && n.backward) n.backward(*this, n.grad);
  }
}

Tensor Tape::grad_of(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.has_grad ? n.grad : Tensor(n.value.shape(), 0.0);
}

std::vector<Tensor> reverse_grad(Var loss, std::span<const Var> params) {
  Tape& tape = *loss.tape();
  loss.value().require_finite("reverse_grad loss");
  tape.backward(loss);
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Var& p : params) out.push_back(tape.grad_of(p));
  return out;
}

RowMask RowMask::off_diagonal(std::size_t n) {
  RowMask m{n, n, std::vector<std::uint8_t>(n * n, 1)};
  for (std::size_t i = 0; i < n; ++i) m.keep[i * n + i] = 0;
  return m;
}

namespace {

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

std::size_t last_dim(const Tensor& t) { return t.rank() == 0 ? 1 : t.shape().back(); }

}  // namespace

Var add(Var a, Var b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    for (auto id : {ia, ib}) {
      if (!t.requires_grad(id)) continue;
      Tensor& d = t.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia)) {
      Tensor& d = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& d = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& d = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& d = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (auto& x : out.values()) x *= s;
  const auto ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, s](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += s * g[i];
  });
}

Var add_bias(Var a, Var bias) {
  const std::size_t cols = last_dim(a.value());
  if (bias.value().rank() != 1 || bias.value().size() != cols) {
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not match last axis of " +
                     shape_str(a.shape()));
  }
  Tensor out = a.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % cols];
  const auto ia = a.id(), ib = bias.id();
  return a.tape()->record(std::move(out), {a, bias}, [ia, ib, cols](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia)) {
      Tensor& d = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& d = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i % cols] += g[i];
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  const auto ia = a.id();
  return a.tape()->record(Tensor::scalar(s), {a}, [ia](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(ia);
    const double gv = g[0];
    for (auto& x : d.values()) x += gv;
  });
}

Var sum_leading(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 3) throw ShapeError("sum_leading: expected rank 3, got " + shape_str(av.shape()));
  const std::size_t batch = av.dim(0), inner = av.dim(1) * av.dim(2);
  Tensor out(Shape{av.dim(1), av.dim(2)}, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = av.data() + b * inner;
    for (std::size_t i = 0; i < inner; ++i) out[i] += src[i];
  }
  const auto ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, batch, inner](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(ia);
    for (std::size_t b = 0; b < batch; ++b) {
      double* dst = d.data() + b * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += g[i];
    }
  });
}

namespace {

struct MatmulGeometry {
  std::size_t batch = 0;  // 0 means plain 2-D
  bool a_batched = false, b_batched = false;
  std::size_t m = 0, n = 0, k = 0;
  std::size_t a_stride = 0, b_stride = 0;
};

MatmulGeometry matmul_geometry(const Tensor& a, const Tensor& b, bool ta, bool tb) {
  if ((a.rank() != 2 && a.rank() != 3) || (b.rank() != 2 && b.rank() != 3)) {
    throw ShapeError("matmul: operands must be rank 2 or 3, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  MatmulGeometry g;
  g.a_batched = a.rank() == 3;
  g.b_batched = b.rank() == 3;
  const std::size_t ar = a.dim(a.rank() - 2), ac = a.dim(a.rank() - 1);
  const std::size_t br = b.dim(b.rank() - 2), bc = b.dim(b.rank() - 1);
  g.m = ta ? ac : ar;
  g.k = ta ? ar : ac;
  const std::size_t kb = tb ? bc : br;
  g.n = tb ? br : bc;
  if (g.k != kb) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_str(a.shape()) + (ta ? "^T" : "") + " x " +
                     shape_str(b.shape()) + (tb ? "^T" : ""));
  }
  if (g.a_batched && g.b_batched && a.dim(0) != b.dim(0)) {
    throw ShapeError("matmul: batch sizes differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  g.batch = g.a_batched ? a.dim(0) : (g.b_batched ? b.dim(0) : 0);
  g.a_stride = g.a_batched ? ar * ac : 0;
  g.b_stride = g.b_batched ? br * bc : 0;
  return g;
}

}  // namespace

Var matmul(Var a, Var b, bool ta, bool tb) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const MatmulGeometry geo = matmul_geometry(av, bv, ta, tb);
  const std::size_t batches = std::max<std::size_t>(geo.batch, 1);
  Tensor out(geo.batch ? Shape{geo.batch, geo.m, geo.n} : Shape{geo.m, geo.n}, 0.0);
  for (std::size_t bi = 0; bi < batches; ++bi) {
    kernels::gemm(av.data() + bi * geo.a_stride, bv.data() + bi * geo.b_stride, out.data() + bi * geo.m * geo.n,
                  geo.m, geo.n, geo.k, ta, tb, false);
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib, geo, ta, tb, batches](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    const std::size_t m = geo.m, n = geo.n, k = geo.k;
    const bool need_a = t.requires_grad(ia), need_b = t.requires_grad(ib);
    double* da = need_a ? t.grad(ia).data() : nullptr;
    double* db = need_b ? t.grad(ib).data() : nullptr;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const double* A = av.data() + bi * geo.a_stride;
      const double* B = bv.data() + bi * geo.b_stride;
      const double* dC = g.data() + bi * m * n;
      if (need_a) {
        double* dA = da + bi * geo.a_stride;
        if (!ta && !tb) kernels::gemm(dC, B, dA, m, k, n, false, true, true);
        if (!ta && tb) kernels::gemm(dC, B, dA, m, k, n, false, false, true);
        if (ta && !tb) kernels::gemm(B, dC, dA, k, m, n, false, true, true);
        if (ta && tb) kernels::gemm(B, dC, dA, k, m, n, true, true, true);
      }
      if (need_b) {
        double* dB = db + bi * geo.b_stride;
        if (!ta && !tb) kernels::gemm(A, dC, dB, k, n, m, true, false, true);
        if (!ta && tb) kernels::gemm(dC, A, dB, n, k, m, true, false, true);
        if (ta && !tb) kernels::gemm(A, dC, dB, k, n, m, false, false, true);
        if (ta && tb) kernels::gemm(dC, A, dB, n, k, m, true, true, true);
      }
    }
  });
}

Tensor softmax_rows(const Tensor& x, const RowMask* mask) {
  const std::size_t cols = last_dim(x);
  const std::size_t rows = x.size() / cols;
  if (mask && (mask->cols != cols || mask->rows == 0 || rows % mask->rows != 0)) {
    throw ShapeError("softmax_rows: mask " + std::to_string(mask->rows) + "x" + std::to_string(mask->cols) +
                     " incompatible with " + shape_str(x.shape()));
  }
  Tensor y(x.shape(), 0.0);
  kernels::softmax_rows(x.data(), mask ? mask->keep.data() : nullptr, mask ? mask->rows : 1, y.data(), rows, cols);
  return y;
}

Var softmax_rows(Var x, const RowMask* mask) {
  Tensor y = softmax_rows(x.value(), mask);
  const auto ix = x.id(), iy = x.tape()->size();
  const std::size_t cols = last_dim(y), rows = y.size() / cols;
  return x.tape()->record(std::move(y), {x}, [ix, iy, rows, cols](Tape& t, const Tensor& g) {
    kernels::softmax_rows_backward(t.value(iy).data(), g.data(), t.grad(ix).data(), rows, cols);
  });
}

Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps) {
  const std::size_t cols = last_dim(x);
  if (gain.rank() != 1 || gain.size() != cols) {
    throw ShapeError("rms_norm: gain " + shape_str(gain.shape()) + " does not match " + shape_str(x.shape()));
  }
  if (!(eps >= 0.0)) throw ContractError("rms_norm: eps must be >= 0");
  Tensor y(x.shape(), 0.0);
  kernels::rms_norm_rows(x.data(), gain.data(), y.data(), x.size() / cols, cols, eps);
  return y;
}

Var rms_norm_rows(Var x, Var gain, double eps) {
  Tensor y = rms_norm(x.value(), gain.value(), eps);
  const auto ix = x.id(), ig = gain.id();
  return x.tape()->record(std::move(y), {x, gain}, [ix, ig, eps](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(ix);
    const Tensor& gv = t.value(ig);
    const std::size_t cols = gv.size(), rows = xv.size() / cols;
    const bool need_x = t.requires_grad(ix), need_g = t.requires_grad(ig);
    double* dx = need_x ? t.grad(ix).data() : nullptr;
    double* dg = need_g ? t.grad(ig).data() : nullptr;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = xv.data() + r * cols;
      const double* gr = g.data() + r * cols;
      double ss = 0.0;
      for (std::size_t j = 0; j < cols; ++j) ss += xr[j] * xr[j];
      const double d = std::sqrt(ss / static_cast<double>(cols) + eps);
      if (d == 0.0) continue;
      if (need_g) {
        for (std::size_t j = 0; j < cols; ++j) dg[j] += gr[j] * xr[j] / d;
      }
      if (need_x) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += gv[j] * gr[j] * xr[j];
        const double c = dot / (static_cast<double>(cols) * d * d * d);
        double* dxr = dx + r * cols;
        for (std::size_t j = 0; j < cols; ++j) dxr[j] += gv[j] * gr[j] / d - xr[j] * c;
      }
    }
  });
}

Var gather_rows(Var table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw ShapeError("gather_rows: table must be rank 2, got " + shape_str(tv.shape()));
  const std::size_t rows = tv.dim(0), cols = tv.dim(1);
  Tensor out(Shape{ids.size(), cols}, 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw ContractError("gather_rows: id " + std::to_string(ids[i]) + " out of range [0, " + std::to_string(rows) +
                          ")");
    }
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * cols, cols, out.data() + i * cols);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  const auto it = table.id();
  return table.tape()->record(std::move(out), {table}, [it, idv = std::move(idv), cols](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(it);
    for (std::size_t i = 0; i < idv.size(); ++i) {
      double* dst = d.data() + static_cast<std::size_t>(idv[i]) * cols;
      const double* src = g.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) dst[j] += src[j];
    }
  });
}

std::size_t relative_bucket(long distance, std::size_t buckets) {
  const long half = static_cast<long>(buckets / 2);
  const long clipped = std::clamp(distance, -half, static_cast<long>(buckets) - half - 1);
  return static_cast<std::size_t>(clipped + half);
}

Var relative_position_bias(Var p, std::size_t n) {
  const Tensor& pv = p.value();
  if (pv.rank() != 2 || pv.dim(1) == 0) throw ShapeError("relative_position_bias: expected [C x K], got " + shape_str(pv.shape()));
  const std::size_t channels = pv.dim(0), buckets = pv.dim(1);
  std::vector<std::size_t> bucket(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      bucket[i * n + j] = relative_bucket(static_cast<long>(i) - static_cast<long>(j), buckets);
    }
  }
  Tensor out(Shape{channels, n, n}, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t e = 0; e < n * n; ++e) out[c * n * n + e] = pv[c * buckets + bucket[e]];
  }
  const auto ip = p.id();
  return p.tape()->record(std::move(out), {p},
                          [ip, bucket = std::move(bucket), channels, buckets, n](Tape& t, const Tensor& g) {
                            Tensor& d = t.grad(ip);
                            for (std::size_t c = 0; c < channels; ++c) {
                              for (std::size_t e = 0; e < n * n; ++e) d[c * buckets + bucket[e]] += g[c * n * n + e];
                            }
                          });
}

Var masked_cross_entropy(Var logits, std::span<const int> targets, std::span<const int> positions,
                         double normalizer) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2) throw ShapeError("masked_cross_entropy: logits must be [n x V], got " + shape_str(lv.shape()));
  if (positions.empty()) throw ContractError("masked_cross_entropy: no masked positions");
  if (targets.size() != positions.size()) throw ShapeError("masked_cross_entropy: targets/positions length mismatch");
  const std::size_t n = lv.dim(0), vocab = lv.dim(1);
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(positions.size());
  std::vector<double> probs(positions.size() * vocab);
  double total = 0.0;
  for (std::size_t q = 0; q < positions.size(); ++q) {
    const auto pos = static_cast<std::size_t>(positions[q]);
    if (positions[q] < 0 || pos >= n) throw ContractError("masked_cross_entropy: position out of range");
    if (targets[q] < 0 || static_cast<std::size_t>(targets[q]) >= vocab) {
      throw ContractError("masked_cross_entropy: target out of range");
    }
    const double* row = lv.data() + pos * vocab;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < vocab; ++v) mx = std::max(mx, row[v]);
    double s = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) {
      probs[q * vocab + v] = std::exp(row[v] - mx);
      s += probs[q * vocab + v];
    }
    for (std::size_t v = 0; v < vocab; ++v) probs[q * vocab + v] /= s;
    total += (mx + std::log(s)) - row[targets[q]];
  }
  std::vector<int> pos(positions.begin(), positions.end()), tgt(targets.begin(), targets.end());
  const auto il = logits.id();
  return logits.tape()->record(
      Tensor::scalar(total / norm), {logits},
      [il, probs = std::move(probs), pos = std::move(pos), tgt = std::move(tgt), vocab, norm](Tape& t,
                                                                                             const Tensor& g) {
        Tensor& d = t.grad(il);
        const double scale = g[0] / norm;
        for (std::size_t q = 0; q < pos.size(); ++q) {
          double* dr = d.data() + static_cast<std::size_t>(pos[q]) * vocab;
          for (std::size_t v = 0; v < vocab; ++v) dr[v] += scale * probs[q * vocab + v];
          dr[tgt[q]] -= scale;
        }
      });
}

}  // namespace mupt
