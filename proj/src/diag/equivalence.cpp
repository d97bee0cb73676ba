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


#include "mupt/diag/equivalence.hpp"

#include <cmath>
#include <limits>

#include "mupt/core/error.hpp"

namespace mupt {

namespace {

using Mat = std::vector<std::vector<double>>;

Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<double>(c, 0.0)); }

std::vector<double> softmax(const std::vector<double>& x, std::size_t skip = static_cast<std::size_t>(-1)) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k != skip) mx = std::max(mx, x[k]);
  }
  std::vector<double> y(x.size(), 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k == skip) continue;
    y[k] = std::exp(x[k] - mx);
    z += y[k];
  }
  for (double& v : y) v /= z;
  return y;
}

Tensor to_tensor(const Mat& m) {
  Tensor t(Shape{m.size(), m.empty() ? 0 : m[0].size()});
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) t.at(i, j) = m[i][j];
  }
  return t;
}

Tensor to_tensor3(const std::vector<Mat>& m) {
  const std::size_t n = m[0].size();
  Tensor t(Shape{m.size(), n, n});
  for (std::size_t c = 0; c < m.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) t.at(c, i, j) = m[c][i][j];
    }
  }
  return t;
}

Mat from_tensor(const Tensor& t) {
  Mat m = zeros(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) m[i][j] = t.at(i, j);
  }
  return m;
}

std::vector<Mat> from_tensor3(const Tensor& t) {
  std::vector<Mat> m(t.dim(0), zeros(t.dim(1), t.dim(2)));
  for (std::size_t c = 0; c < m.size(); ++c) {
    for (std::size_t i = 0; i < t.dim(1); ++i) {
      for (std::size_t j = 0; j < t.dim(2); ++j) m[c][i][j] = t.at(c, i, j);
    }
  }
  return m;
}

double u_at(const ModelParams& p, const PTConfig& c, std::size_t ch, std::size_t a, std::size_t l) {
  return p.U[(ch * c.width + a) * c.rank + l];
}
double v_at(const ModelParams& p, const PTConfig& c, std::size_t ch, std::size_t a, std::size_t l) {
  return p.V[(ch * c.width + a) * c.rank + l];
}

double pos_bias(const ModelParams& p, const PTConfig& c, std::size_t ch, std::size_t i, std::size_t j) {
  if (!c.pos_bias) return 0.0;
  const long d = static_cast<long>(i) - static_cast<long>(j);
  return p.P_rel.at(ch, relative_bucket(d, c.pos_buckets));
}

Mat readout(const Mat& qz, const ModelParams& p, const PTConfig& c) {
  const std::size_t n = qz.size(), N = c.width, V = c.vocab_size;
  Mat out = zeros(n, V);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(N);
    double ms = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
      x[a] = static_cast<double>(N) * qz[i][a];
      ms += x[a] * x[a];
    }
    const double inv = 1.0 / std::sqrt(ms / static_cast<double>(N) + c.norm_eps);
    for (std::size_t v = 0; v < V; ++v) {
      double acc = 0.0;
      for (std::size_t a = 0; a < N; ++a) acc += p.gamma[a] * x[a] * inv * p.W_out.at(a, v);
      out[i][v] = acc + p.b_out[v];
    }
  }
  return out;
}

// The literal path sums N^2 products carrying tau N factors; it accumulates in
// extended precision so that its own rounding stays below the production path's.
using Wide = long double;

std::vector<double> softmax_wide(const std::vector<Wide>& x, std::size_t skip = static_cast<std::size_t>(-1)) {
  Wide mx = -std::numeric_limits<Wide>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k != skip) mx = std::max(mx, x[k]);
  }
  std::vector<Wide> e(x.size(), 0.0L);
  Wide z = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k == skip) continue;
    e[k] = std::exp(x[k] - mx);
    z += e[k];
  }
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = static_cast<double>(e[k] / z);
  return y;
}

struct Literal {
  std::span<const int> tokens;
  const ModelParams& p;
  const PTConfig& c;
  const InfoWeights& w;
  std::vector<std::vector<std::vector<Wide>>> t;
  Wide tau;

  Literal(std::span<const int> tk, const ModelParams& pp, const PTConfig& cc, const InfoWeights& ww)
      : tokens(tk), p(pp), c(cc), w(ww), tau(static_cast<Wide>(cc.width) / static_cast<Wide>(cc.rank)) {
    t.assign(c.channels, std::vector<std::vector<Wide>>(c.width, std::vector<Wide>(c.width, 0.0L)));
    for (std::size_t ch = 0; ch < c.channels; ++ch) {
      for (std::size_t a = 0; a < c.width; ++a) {
        for (std::size_t b = 0; b < c.width; ++b) {
          Wide acc = 0.0L;
          for (std::size_t l = 0; l < c.rank; ++l) {
            acc += static_cast<Wide>(u_at(p, c, ch, a, l)) * static_cast<Wide>(v_at(p, c, ch, b, l));
          }
          t[ch][a][b] = acc;
        }
      }
    }
  }

  // -dE/dQ_z with every potential factor explicit.
  std::vector<std::vector<Wide>> z_gradient(const Mat& qz, const std::vector<Mat>& qh, const Mat& qg) const {
    const std::size_t n = tokens.size(), N = c.width, M = c.topics;
    const Wide tn = tau * static_cast<Wide>(N), tm = tau * static_cast<Wide>(M);
    std::vector<std::vector<Wide>> g(n, std::vector<Wide>(N, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < N; ++a) {
        const Wide unary = tau * static_cast<Wide>(p.S.at(static_cast<std::size_t>(tokens[i]), a));
        Wide binary = 0.0L;
        for (std::size_t k = 0; k < M; ++k) binary += static_cast<Wide>(qg[i][k]) * tm * static_cast<Wide>(p.B.at(k, a));
        Wide dep = 0.0L, head = 0.0L;
        for (std::size_t ch = 0; ch < c.channels; ++ch) {
          for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            Wide td = 0.0L, th = 0.0L;
            for (std::size_t b = 0; b < N; ++b) {
              td += tn * t[ch][a][b] * static_cast<Wide>(qz[j][b]);
              th += tn * t[ch][b][a] * static_cast<Wide>(qz[j][b]);
            }
            dep += static_cast<Wide>(qh[ch][i][j]) * td;
            head += static_cast<Wide>(qh[ch][j][i]) * th;
          }
        }
        g[i][a] = static_cast<Wide>(w.unary) * unary + static_cast<Wide>(w.binary) * binary +
                  static_cast<Wide>(w.tern_dep) * dep + static_cast<Wide>(w.tern_head) * head;
      }
    }
    return g;
  }

  std::vector<Mat> heads(const Mat& qz) const {
    const std::size_t n = tokens.size(), N = c.width;
    const Wide tn = tau * static_cast<Wide>(N);
    std::vector<Mat> qh(c.channels, zeros(n, n));
    for (std::size_t ch = 0; ch < c.channels; ++ch) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<Wide> logit(n, 0.0L);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          Wide e = 0.0L;
          for (std::size_t a = 0; a < N; ++a) {
            for (std::size_t b = 0; b < N; ++b) {
              e += static_cast<Wide>(qz[i][a]) * static_cast<Wide>(qz[j][b]) * tn * t[ch][a][b];
            }
          }
          logit[j] = static_cast<Wide>(w.attn) * (e + static_cast<Wide>(pos_bias(p, c, ch, i, j)));
        }
        qh[ch][i] = softmax_wide(logit, i);
      }
    }
    return qh;
  }

  Mat topics(const Mat& qz) const {
    const std::size_t n = tokens.size(), N = c.width, M = c.topics;
    const Wide tm = tau * static_cast<Wide>(M);
    Mat qg = zeros(n, M);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Wide> logit(M, 0.0L);
      for (std::size_t k = 0; k < M; ++k) {
        Wide e = 0.0L;
        for (std::size_t a = 0; a < N; ++a) e += static_cast<Wide>(qz[i][a]) * tm * static_cast<Wide>(p.B.at(k, a));
        logit[k] = static_cast<Wide>(w.topic) * (e / tau);
      }
      qg[i] = softmax_wide(logit);
    }
    return qg;
  }

  Mat init() const {
    Mat qz = zeros(tokens.size(), c.width);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      std::vector<Wide> l(c.width);
      for (std::size_t a = 0; a < c.width; ++a) {
        l[a] = static_cast<Wide>(w.unary) * (tau * static_cast<Wide>(p.S.at(static_cast<std::size_t>(tokens[i]), a))) / tau;
      }
      qz[i] = softmax_wide(l);
    }
    return qz;
  }
};

}  // namespace

PathTrace tau_literal_path(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                           const InfoWeights& weights) {
  validate_params(params, config);
  Literal lit(tokens, params, config, weights);
  PathTrace tr;
  Mat qz = lit.init();
  for (std::size_t s = 0; s < config.mfvi_iters; ++s) {
    auto qh = lit.heads(qz);
    Mat qg = lit.topics(qz);
    auto g = lit.z_gradient(qz, qh, qg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (Wide& v : g[i]) v /= lit.tau;
      qz[i] = softmax_wide(g[i]);
    }
    tr.qh.push_back(to_tensor3(qh));
    tr.qg.push_back(to_tensor(qg));
    tr.qz.push_back(to_tensor(qz));
  }
  tr.mlm = to_tensor(readout(qz, params, config));
  return tr;
}

PathTrace cancelled_path(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                         const InfoWeights& weights) {
  validate_params(params, config);
  Tape tape;
  ParamVars vars = ParamVars::bind(tape, params, false);
  MFVIGraph graph(tape, vars, config, weights, tokens);
  std::vector<SweepTrace> sweeps;
  StateVars s = graph.run(&sweeps);
  PathTrace tr;
  for (const auto& sw : sweeps) {
    tr.qh.push_back(sw.state.qh.value());
    tr.qg.push_back(sw.state.qg.value());
    tr.qz.push_back(sw.state.qz.value());
  }
  tr.mlm = graph.mlm_logits(s.nz).value();
  return tr;
}

PathTrace scaled_activation_path(std::span<const int> tokens, const ModelParams& p, const PTConfig& c,
                                 const InfoWeights& w) {
  validate_params(p, c);
  const std::size_t n = tokens.size(), N = c.width, M = c.topics, r = c.rank, C = c.channels;
  Mat qz = zeros(n, N);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> l(N);
    for (std::size_t a = 0; a < N; ++a) l[a] = w.unary * p.S.at(static_cast<std::size_t>(tokens[i]), a);
    qz[i] = softmax(l);
  }
  PathTrace tr;
  for (std::size_t s = 0; s < c.mfvi_iters; ++s) {
    // feature <- N Q_z
    Mat x = qz;
    for (auto& row : x) {
      for (double& v : row) v *= static_cast<double>(N);
    }
    std::vector<Mat> q(C, zeros(n, r)), k(C, zeros(n, r));
    for (std::size_t ch = 0; ch < C; ++ch) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < r; ++l) {
          double aq = 0.0, ak = 0.0;
          for (std::size_t a = 0; a < N; ++a) {
            aq += x[i][a] * u_at(p, c, ch, a, l);
            ak += x[i][a] * v_at(p, c, ch, a, l);
          }
          q[ch][i][l] = aq;
          k[ch][i][l] = ak;
        }
      }
    }
    std::vector<Mat> qh(C, zeros(n, n));
    for (std::size_t ch = 0; ch < C; ++ch) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double dot = 0.0;
          for (std::size_t l = 0; l < r; ++l) dot += q[ch][i][l] * k[ch][j][l];
          // F <- F / r
          f[j] = w.attn * (dot / static_cast<double>(r) + pos_bias(p, c, ch, i, j));
        }
        qh[ch][i] = softmax(f, i);
      }
    }
    Mat qg = zeros(n, M);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> l(M);
      for (std::size_t g = 0; g < M; ++g) {
        double dot = 0.0;
        for (std::size_t a = 0; a < N; ++a) dot += x[i][a] * p.B.at(g, a);
        l[g] = w.topic * (static_cast<double>(M) / static_cast<double>(N)) * dot;
      }
      qg[i] = softmax(l);
    }
    Mat next = zeros(n, N);
    for (std::size_t i = 0; i < n; ++i) {
      // Heads of token i and tokens heading to i, aggregated in rank space first.
      std::vector<std::vector<double>> kd(C, std::vector<double>(r, 0.0)), qd(C, std::vector<double>(r, 0.0));
      for (std::size_t ch = 0; ch < C; ++ch) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          for (std::size_t l = 0; l < r; ++l) {
            kd[ch][l] += qh[ch][i][j] * k[ch][j][l];
            qd[ch][l] += qh[ch][j][i] * q[ch][j][l];
          }
        }
      }
      std::vector<double> logit(N);
      for (std::size_t a = 0; a < N; ++a) {
        double binary = 0.0;
        for (std::size_t g = 0; g < M; ++g) binary += static_cast<double>(M) * qg[i][g] * p.B.at(g, a);
        double dep = 0.0, head = 0.0;
        for (std::size_t ch = 0; ch < C; ++ch) {
          for (std::size_t l = 0; l < r; ++l) {
            dep += kd[ch][l] * u_at(p, c, ch, a, l);
            head += qd[ch][l] * v_at(p, c, ch, a, l);
          }
        }
        logit[a] = w.unary * p.S.at(static_cast<std::size_t>(tokens[i]), a) + w.binary * binary + w.tern_dep * dep +
                   w.tern_head * head;
      }
      next[i] = softmax(logit);
    }
    qz = std::move(next);
    tr.qh.push_back(to_tensor3(qh));
    tr.qg.push_back(to_tensor(qg));
    tr.qz.push_back(to_tensor(qz));
  }
  tr.mlm = to_tensor(readout(qz, p, c));
  return tr;
}

Tensor tau_literal_z_gradient(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                              const PTConfig& config, const InfoWeights& weights) {
  validate_params(params, config);
  const std::size_t n = tokens.size();
  if (state.qz.shape() != Shape{n, config.width} || state.qh.shape() != Shape{config.channels, n, n} ||
      state.qg.shape() != Shape{n, config.topics}) {
    throw ShapeError("tau_literal_z_gradient: state does not match tokens and config");
  }
  Literal lit(tokens, params, config, weights);
  const auto g = lit.z_gradient(from_tensor(state.qz), from_tensor3(state.qh), from_tensor(state.qg));
  Tensor out(Shape{n, config.width});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < config.width; ++a) out.at(i, a) = static_cast<double>(g[i][a]);
  }
  return out;
}

// |a - b| per element, scaled by the largest magnitude in its last-axis row.
// Plain elementwise ratios blow up on probabilities near 1e-39 and on logits
// that cancel to ~0, where they measure conditioning rather than agreement.
double relative_deviation(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("relative_deviation: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  if (a.size() == 0) return 0.0;
  const std::size_t cols = a.shape().empty() ? 1 : a.shape().back();
  double worst = 0.0;
  for (std::size_t r = 0; r * cols < a.size(); ++r) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t k = r * cols; k < (r + 1) * cols; ++k) {
      if (std::isnan(a[k]) || std::isnan(b[k])) return std::numeric_limits<double>::infinity();
      scale = std::max({scale, std::abs(a[k]), std::abs(b[k])});
      diff = std::max(diff, std::abs(a[k] - b[k]));
    }
    if (diff == 0.0) continue;
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

EquivalenceReport equivalence_check(const PTConfig& config, const ModelParams& params, const InfoWeights& weights,
                                    std::span<const int> tokens) {
  config.validate();
  if (config.width > 64) throw ContractError("equivalence_check: width must be <= 64 for the dense-T path");
  const PathTrace a = tau_literal_path(tokens, params, config, weights);
  const PathTrace b = cancelled_path(tokens, params, config, weights);
  const PathTrace c = scaled_activation_path(tokens, params, config, weights);
  EquivalenceReport rep;
  auto compare = [&](const std::string& name, const Tensor& x, const Tensor& y, const Tensor& z) {
    const std::pair<const char*, double> devs[] = {{"a~b", relative_deviation(x, y)},
                                                   {"b~c", relative_deviation(y, z)},
                                                   {"a~c", relative_deviation(x, z)}};
    double worst = 0.0;
    for (const auto& [pair, d] : devs) {
      worst = std::max(worst, d);
      if (rep.worst.empty() || d > rep.max_deviation) {
        rep.max_deviation = d;
        rep.worst = std::string(pair) + " " + name;
      }
    }
    rep.per_tensor.emplace_back(name, worst);
  };
  for (std::size_t s = 0; s < a.qz.size(); ++s) {
    const std::string t = "sweep" + std::to_string(s + 1);
    compare(t + ".qh", a.qh[s], b.qh[s], c.qh[s]);
    compare(t + ".qg", a.qg[s], b.qg[s], c.qg[s]);
    compare(t + ".qz", a.qz[s], b.qz[s], c.qz[s]);
  }
  compare("mlm_logits", a.mlm, b.mlm, c.mlm);
  return rep;
}

EquivalenceReport equivalence_check(const PTConfig& config, std::uint64_t seed) {
  SeededRng rng(mix_seed(seed, 0xe9));
  ModelParams params = init_model_params(config, rng);
  if (config.pos_bias) params.P_rel = gaussian_tensor(rng, params.P_rel.shape(), 1.0);
  InfoWeights w;
  std::array<double, 6> wa{};
  for (double& v : wa) v = rng.uniform(0.5, 1.5);
  w = InfoWeights::from_array(wa);
  const std::size_t n = std::min<std::size_t>(8, config.max_len);
  std::vector<int> tokens(n);
  for (int& t : tokens) t = static_cast<int>(rng.below(config.vocab_size));
  return equivalence_check(config, params, w, tokens);
}

nlohmann::json to_json(const EquivalenceReport& r) {
  nlohmann::json j;
  j["max_deviation"] = r.max_deviation;
  j["worst"] = r.worst;
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [name, d] : r.per_tensor) t[name] = d;
  j["per_tensor"] = t;
  return j;
}

}  // namespace mupt
