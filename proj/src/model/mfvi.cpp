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


#include "mupt/model/mfvi.hpp"

#include <limits>

#include "mupt/core/error.hpp"

namespace mupt {

ParamVars ParamVars::bind(Tape& tape, const ModelParams& p, bool trainable) {
  auto leaf = [&](const Tensor& t) { return trainable ? tape.parameter(t) : tape.constant(t); };
  ParamVars v;
  v.S = leaf(p.S);
  v.U = leaf(p.U);
  v.V = leaf(p.V);
  v.B = leaf(p.B);
  v.gamma = leaf(p.gamma);
  v.W_out = leaf(p.W_out);
  v.b_out = leaf(p.b_out);
  v.P_rel = leaf(p.P_rel);
  return v;
}

MFVIGraph::MFVIGraph(Tape& tape, const ParamVars& params, const PTConfig& config, const InfoWeights& weights,
                     std::span<const int> tokens)
    : tape_(tape), p_(params), config_(config), weights_(weights), tokens_(tokens.begin(), tokens.end()) {
  if (tokens_.size() < 2) throw ContractError("head selection undefined for single-token sequence");
  if (tokens_.size() > config_.max_len) {
    throw ContractError("sequence length " + std::to_string(tokens_.size()) + " exceeds max_len " +
                        std::to_string(config_.max_len));
  }
  for (int t : tokens_) {
    if (t < 0 || static_cast<std::size_t>(t) >= config_.vocab_size) {
      throw ContractError("token id " + std::to_string(t) + " outside vocabulary of size " +
                          std::to_string(config_.vocab_size));
    }
  }
  head_mask_ = RowMask::off_diagonal(tokens_.size());
}

StateVars MFVIGraph::init() {
  const std::size_t n = tokens_.size();
  StateVars s;
  if (!unary_.valid()) unary_ = scale(gather_rows(p_.S, tokens_), weights_.unary);
  s.qz = softmax_rows(unary_);
  s.nz = scale(s.qz, static_cast<double>(config_.width));
  Tensor qh(Shape{config_.channels, n, n}, 1.0 / static_cast<double>(n - 1));
  for (std::size_t c = 0; c < config_.channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) qh.at(c, i, i) = 0.0;
  }
  s.qh = tape_.constant(std::move(qh));
  s.qg = tape_.constant(Tensor(Shape{n, config_.topics}, 1.0 / static_cast<double>(config_.topics)));
  return s;
}

StateVars MFVIGraph::from_state(const MFVIState& state) {
  const std::size_t n = tokens_.size();
  if (state.qz.shape() != Shape{n, config_.width} || state.qh.shape() != Shape{config_.channels, n, n} ||
      state.qg.shape() != Shape{n, config_.topics}) {
    throw ShapeError("MFVIState shapes do not match the config and sequence length");
  }
  StateVars s;
  s.qz = tape_.constant(state.qz);
  s.nz = scale(s.qz, static_cast<double>(config_.width));
  s.qh = tape_.constant(state.qh);
  s.qg = tape_.constant(state.qg);
  return s;
}

std::pair<Var, Var> MFVIGraph::projections(Var nz) {
  if (cached_nz_ != nz.id()) {
    cached_qk_ = {matmul(nz, p_.U), matmul(nz, p_.V)};
    cached_nz_ = nz.id();
  }
  return cached_qk_;
}

Var MFVIGraph::attention_logits(Var nz) {
  auto [q, k] = projections(nz);
  Var f = scale(matmul(q, k, false, true), 1.0 / static_cast<double>(config_.rank));
  if (config_.pos_bias) f = add(f, relative_position_bias(p_.P_rel, tokens_.size()));
  return f;
}

Var MFVIGraph::head_posteriors(Var attn_logits) { return softmax_rows(scale(attn_logits, weights_.attn), &head_mask_); }

Var MFVIGraph::topic_logits(Var nz) {
  const double ratio = static_cast<double>(config_.topics) / static_cast<double>(config_.width);
  return scale(matmul(nz, p_.B, false, true), weights_.topic * ratio);
}

Var MFVIGraph::topic_posteriors(Var topic_logits) { return softmax_rows(topic_logits); }

Var MFVIGraph::z_logits(Var nz, Var qh, Var qg) {
  auto [q, k] = projections(nz);
  if (!unary_.valid()) unary_ = scale(gather_rows(p_.S, tokens_), weights_.unary);
  Var unary = unary_;
  Var ng = scale(qg, static_cast<double>(config_.topics));
  Var binary = matmul(ng, p_.B);
  // sum_c Q_h[c] k_c U_c^T: token i reads its heads j
  Var dep = sum_leading(matmul(matmul(qh, k), p_.U, false, true));
  // sum_c Q_h[c]^T q_c V_c^T: token i is read by the tokens j that select it
  Var head = sum_leading(matmul(matmul(qh, q, true, false), p_.V, false, true));
  Var logits = add(unary, scale(binary, weights_.binary));
  logits = add(logits, scale(dep, weights_.tern_dep));
  logits = add(logits, scale(head, weights_.tern_head));
  return logits;
}

StateVars MFVIGraph::z_update(Var zl, Var qh, Var qg) {
  StateVars s;
  s.qz = softmax_rows(zl);
  s.nz = scale(s.qz, static_cast<double>(config_.width));
  s.qh = qh;
  s.qg = qg;
  return s;
}

StateVars MFVIGraph::sweep(const StateVars& s, SweepTrace* trace) {
  Var f = attention_logits(s.nz);
  Var qh = head_posteriors(f);
  Var tl = topic_logits(s.nz);
  Var qg = topic_posteriors(tl);
  Var zl = z_logits(s.nz, qh, qg);
  StateVars next = z_update(zl, qh, qg);
  if (trace) *trace = SweepTrace{f, tl, zl, next};
  return next;
}

StateVars MFVIGraph::run(std::vector<SweepTrace>* trace) {
  StateVars s = init();
  for (std::size_t t = 0; t < config_.mfvi_iters; ++t) {
    SweepTrace tr;
    s = sweep(s, trace ? &tr : nullptr);
    if (trace) trace->push_back(tr);
  }
  return s;
}

Var MFVIGraph::mlm_logits(Var nz) {
  Var feature = rms_norm_rows(nz, p_.gamma, config_.norm_eps);
  return add_bias(matmul(feature, p_.W_out), p_.b_out);
}

MFVIState to_state(const StateVars& s) { return MFVIState{s.qz.value(), s.qh.value(), s.qg.value()}; }

namespace {

// Throwaway graph over constant parameters for the value-level API.
struct ConstGraph {
  Tape tape;
  ParamVars vars;
  MFVIGraph graph;
  ConstGraph(const ModelParams& params, const PTConfig& config, const InfoWeights& weights,
             std::span<const int> tokens)
      : vars(ParamVars::bind(tape, params, false)), graph(tape, vars, config, weights, tokens) {
    validate_params(params, config);
  }
};

std::vector<int> placeholder_tokens(std::size_t n) { return std::vector<int>(n, 0); }

}  // namespace

MFVIState init_mfvi(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                    const InfoWeights& weights) {
  ConstGraph g(params, config, weights, tokens);
  return to_state(g.graph.init());
}

Tensor attention_logits(const MFVIState& state, const ModelParams& params, const PTConfig& config,
                        std::size_t channel) {
  if (channel >= config.channels) throw ContractError("attention_logits: channel out of range");
  const std::size_t n = state.length();
  const auto tokens = placeholder_tokens(n);
  ConstGraph g(params, config, InfoWeights{}, tokens);
  StateVars s = g.graph.from_state(state);
  const Tensor& all = g.graph.attention_logits(s.nz).value();
  Tensor out(Shape{n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = i == j ? -std::numeric_limits<double>::infinity() : all.at(channel, i, j);
    }
  }
  return out;
}

Tensor update_heads(const MFVIState& state, const ModelParams& params, const PTConfig& config,
                    const InfoWeights& weights) {
  const auto tokens = placeholder_tokens(state.length());
  ConstGraph g(params, config, weights, tokens);
  StateVars s = g.graph.from_state(state);
  return g.graph.head_posteriors(g.graph.attention_logits(s.nz)).value();
}

Tensor update_topics(const MFVIState& state, const ModelParams& params, const PTConfig& config,
                     const InfoWeights& weights) {
  const auto tokens = placeholder_tokens(state.length());
  ConstGraph g(params, config, weights, tokens);
  StateVars s = g.graph.from_state(state);
  return g.graph.topic_posteriors(g.graph.topic_logits(s.nz)).value();
}

Tensor z_logits(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                const PTConfig& config, const InfoWeights& weights) {
  ConstGraph g(params, config, weights, tokens);
  StateVars s = g.graph.from_state(state);
  return g.graph.z_logits(s.nz, s.qh, s.qg).value();
}

Tensor update_z(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                const PTConfig& config, const InfoWeights& weights) {
  return softmax_rows(z_logits(tokens, state, params, config, weights));
}

MFVIState run_mfvi(std::span<const int> tokens, const ModelParams& params, const InfoWeights& weights,
                   const PTConfig& config) {
  ConstGraph g(params, config, weights, tokens);
  return to_state(g.graph.run());
}

Tensor mlm_logits(const MFVIState& state, const ModelParams& params, const PTConfig& config) {
  const auto tokens = placeholder_tokens(state.length());
  ConstGraph g(params, config, InfoWeights{}, tokens);
  StateVars s = g.graph.from_state(state);
  return g.graph.mlm_logits(s.nz).value();
}

double masked_ce_loss(const Tensor& logits, std::span<const int> targets, std::span<const int> positions) {
  Tape tape;
  return masked_cross_entropy(tape.constant(logits), targets, positions).value()[0];
}

Var mlm_loss(Tape& tape, const ParamVars& params, const PTConfig& config, const InfoWeights& weights,
             std::span<const int> inputs, std::span<const int> targets, std::span<const int> positions,
             double normalizer) {
  MFVIGraph graph(tape, params, config, weights, inputs);
  StateVars s = graph.run();
  return masked_cross_entropy(graph.mlm_logits(s.nz), targets, positions, normalizer);
}

}  // namespace mupt
