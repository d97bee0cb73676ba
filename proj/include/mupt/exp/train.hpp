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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupt/exp/corpus.hpp"
#include "mupt/exp/hp_point.hpp"
#include "mupt/exp/masking.hpp"
#include "mupt/model/params.hpp"
#include "mupt/mup/optimizer.hpp"

namespace mupt {

/// Chunked train/eval sequences of one corpus.
struct TrainData {
  DataSplit split;
  SpecialIds specials;
  std::size_t regular_vocab = 256;

  std::size_t vocab_size() const { return regular_vocab + 3; }
};

TrainData make_train_data(const Corpus& corpus, std::size_t seq_len, double eval_fraction);

struct TrainOptions {
  std::size_t steps = 100;
  std::size_t batch_size = 4;
  std::size_t eval_interval = 100;  // 0 evaluates only at the first and last step
  std::size_t eval_sequences = 64;  // held-out chunks used for the frozen eval set
  double mask_ratio = 0.15;
  MaskRule mask_rule = MaskRule::Bert;
  OutputLrVariant output_lr_variant = OutputLrVariant::Table2;
  std::optional<std::size_t> hidden_lr_width;  // mis-scaled control
  AdamWConstants adam;
  InitOptions init;
  std::uint64_t seed = 0;
  bool record_wall_clock = false;
};

struct EvalPoint {
  std::size_t step = 0;
  double loss = 0.0;
};

struct RunRecord {
  std::string config_hash;
  HPPoint hp;
  std::uint64_t seed = 0;
  std::size_t width = 0;
  std::vector<double> train_loss;  // loss of the batch consumed at each step
  std::vector<EvalPoint> eval;
  double final_eval_loss = 0.0;  // +inf when diverged
  bool diverged = false;
  std::size_t diverged_step = 0;
  std::optional<double> wall_clock_seconds;
};

nlohmann::json to_json(const RunRecord& r);

using Batch = std::vector<MaskedSeq>;

struct BatchGrad {
  double loss = 0.0;
  ModelParams grads;
};

/// Mean masked cross-entropy over every masked position of the batch and its
/// gradient. Sequences are differentiated on separate tapes (in parallel when
/// threads allow) and summed in batch order.
BatchGrad batch_loss_and_grad(const ModelParams& params, const PTConfig& config, const InfoWeights& weights,
                              const Batch& batch);
double batch_loss(const ModelParams& params, const PTConfig& config, const InfoWeights& weights,
                  const Batch& batch);

/// Deterministic stream of masked training batches, independent of the model.
class BatchStream {
 public:
  BatchStream(const TrainData& data, const TrainOptions& options);
  Batch next();

 private:
  const TrainData& data_;
  std::size_t batch_size_;
  double ratio_;
  MaskRule rule_;
  SeededRng rng_;
};

/// Eval sequences and masks drawn from the seed alone, so runs that differ only
/// in hyperparameters score the same positions.
Batch frozen_eval_batch(const TrainData& data, const TrainOptions& options);

RunRecord train_run(const PTConfig& config, const HPPoint& hp, const TrainData& data, const TrainOptions& options,
                    const std::string& config_hash, ModelParams* final_params = nullptr);

}  // namespace mupt
