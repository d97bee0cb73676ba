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

#include <span>
#include <utility>
#include <vector>

#include "mupt/core/autograd.hpp"
#include "mupt/model/config.hpp"
#include "mupt/model/params.hpp"

namespace mupt {

/// Posterior families of one sequence of length n.
struct MFVIState {
  Tensor qz;  // [n x N]
  Tensor qh;  // [C x n x n], row (c, i) is the head distribution of token i; diagonal is 0
  Tensor qg;  // [n x M]

  std::size_t length() const { return qz.dim(0); }
};

/// Parameters bound onto a tape, as trainable leaves or constants.
struct ParamVars {
  Var S, U, V, B, gamma, W_out, b_out, P_rel;

  static ParamVars bind(Tape& tape, const ModelParams& params, bool trainable);
  std::vector<Var> as_list() const { return {S, U, V, B, gamma, W_out, b_out, P_rel}; }
};

struct StateVars {
  Var qz;  // Q_z
  Var nz;  // N * Q_z
  Var qh;
  Var qg;
};

/// Probes of one sweep, recorded when a trace is requested.
struct SweepTrace {
  Var attn_logits;   // [C x n x n] before masking
  Var topic_logits;  // [n x M]
  Var z_logits;      // [n x N]
  StateVars state;   // state after the sweep
};

/// Recorded MFVI computation for one token sequence.
///
/// A sweep computes the head and topic posteriors from the current Q_z, then
/// the new Q_z from the refreshed heads and topics. All ternary messages use
/// the low-rank contractions q = N Q_z U_c and k = N Q_z V_c.
class MFVIGraph {
 public:
  MFVIGraph(Tape& tape, const ParamVars& params, const PTConfig& config, const InfoWeights& weights,
            std::span<const int> tokens);

  StateVars init();
  StateVars from_state(const MFVIState& state);

  // F_c = (1/r) q_c k_c^T (+ relative-position bias), [C x n x n], diagonal left unmasked.
  Var attention_logits(Var nz);
  Var head_posteriors(Var attn_logits);
  Var topic_logits(Var nz);
  Var topic_posteriors(Var topic_logits);
  Var z_logits(Var nz, Var qh, Var qg);
  StateVars z_update(Var z_logits, Var qh, Var qg);

  StateVars sweep(const StateVars& s, SweepTrace* trace = nullptr);
  StateVars run(std::vector<SweepTrace>* trace = nullptr);
  Var mlm_logits(Var nz);

  std::size_t length() const { return tokens_.size(); }
  const RowMask& head_mask() const { return head_mask_; }

 private:
  // q = nz U_c and k = nz V_c, [C x n x r]; reused while nz is unchanged.
  std::pair<Var, Var> projections(Var nz);

  Tape& tape_;
  ParamVars p_;
  PTConfig config_;
  InfoWeights weights_;
  std::vector<int> tokens_;
  RowMask head_mask_;
  Var unary_;
  std::size_t cached_nz_ = static_cast<std::size_t>(-1);
  std::pair<Var, Var> cached_qk_;
};

MFVIState to_state(const StateVars& s);

// Value-level operations. Each builds a throwaway tape over constant parameters.
MFVIState init_mfvi(std::span<const int> tokens, const ModelParams& params, const PTConfig& config,
                    const InfoWeights& weights);
// n x n logits of channel c with -inf on the diagonal.
Tensor attention_logits(const MFVIState& state, const ModelParams& params, const PTConfig& config, std::size_t channel);
Tensor update_heads(const MFVIState& state, const ModelParams& params, const PTConfig& config,
                    const InfoWeights& weights);
Tensor update_topics(const MFVIState& state, const ModelParams& params, const PTConfig& config,
                     const InfoWeights& weights);
// Z logits from the state's Q_z (messages) and its Q_h, Q_g.
Tensor z_logits(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                const PTConfig& config, const InfoWeights& weights);
Tensor update_z(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                const PTConfig& config, const InfoWeights& weights);
MFVIState run_mfvi(std::span<const int> tokens, const ModelParams& params, const InfoWeights& weights,
                   const PTConfig& config);
Tensor mlm_logits(const MFVIState& state, const ModelParams& params, const PTConfig& config);
double masked_ce_loss(const Tensor& logits, std::span<const int> targets, std::span<const int> positions);

/// Full MLM loss graph of one masked sequence; `normalizer` divides the summed
/// cross-entropy (defaults to the number of masked positions).
Var mlm_loss(Tape& tape, const ParamVars& params, const PTConfig& config, const InfoWeights& weights,
             std::span<const int> inputs, std::span<const int> targets, std::span<const int> positions,
             double normalizer = 0.0);

}  // namespace mupt
