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


#include "mupt/exp/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "mupt/core/error.hpp"
#include "mupt/model/mfvi.hpp"

namespace mupt {

TrainData make_train_data(const Corpus& corpus, std::size_t seq_len, double eval_fraction) {
  TrainData d;
  d.split = split_chunks(chunk_ids(corpus.ids, seq_len, corpus.specials.pad), eval_fraction);
  d.specials = corpus.specials;
  d.regular_vocab = corpus.regular_vocab;
  return d;
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["config_hash"] = r.config_hash;
  j["hp"] = to_json(r.hp);
  j["seed"] = r.seed;
  j["width"] = r.width;
  j["train_loss"] = r.train_loss;
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : r.eval) ev.push_back({{"step", e.step}, {"loss", e.loss}});
  j["eval_loss"] = ev;
  if (std::isfinite(r.final_eval_loss)) j["final_eval_loss"] = r.final_eval_loss;
  else j["final_eval_loss"] = "inf";
  j["diverged"] = r.diverged;
  if (r.diverged) j["diverged_step"] = r.diverged_step;
  if (r.wall_clock_seconds) j["wall_clock_seconds"] = *r.wall_clock_seconds;
  return j;
}

namespace {

std::size_t masked_count(const Batch& batch) {
  std::size_t total = 0;
  for (const auto& s : batch) total += s.positions.size();
  if (total == 0) throw ContractError("batch has no masked positions");
  return total;
}

}  // namespace

BatchGrad batch_loss_and_grad(const ModelParams& params, const PTConfig& config, const InfoWeights& weights,
                              const Batch& batch) {
  const double normalizer = static_cast<double>(masked_count(batch));
  const auto n = static_cast<long>(batch.size());
  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::vector<Tensor>> grads(batch.size());
  std::vector<std::string> errors(batch.size());
#pragma omp parallel for schedule(static) if (n > 1)
  for (long b = 0; b < n; ++b) {
    const auto& s = batch[static_cast<std::size_t>(b)];
    try {
      Tape tape;
      ParamVars vars = ParamVars::bind(tape, params, true);
      Var loss = mlm_loss(tape, vars, config, weights, s.inputs, s.targets, s.positions, normalizer);
      const auto list = vars.as_list();
      grads[static_cast<std::size_t>(b)] = reverse_grad(loss, list);
      losses[static_cast<std::size_t>(b)] = loss.value()[0];
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(b)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericError("batch gradient failed: " + e);
  }
  BatchGrad out;
  out.grads = zero_model_params(config);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    out.loss += losses[b];
    std::size_t k = 0;
    out.grads.for_each([&](std::string_view, Tensor& g) {
      const Tensor& part = grads[b][k++];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i];
    });
  }
  return out;
}

double batch_loss(const ModelParams& params, const PTConfig& config, const InfoWeights& weights,
                  const Batch& batch) {
  const double normalizer = static_cast<double>(masked_count(batch));
  const auto n = static_cast<long>(batch.size());
  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::string> errors(batch.size());
#pragma omp parallel for schedule(static) if (n > 1)
  for (long b = 0; b < n; ++b) {
    const auto& s = batch[static_cast<std::size_t>(b)];
    try {
      Tape tape;
      ParamVars vars = ParamVars::bind(tape, params, false);
      losses[static_cast<std::size_t>(b)] =
          mlm_loss(tape, vars, config, weights, s.inputs, s.targets, s.positions, normalizer).value()[0];
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(b)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericError("batch loss failed: " + e);
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total;
}

BatchStream::BatchStream(const TrainData& data, const TrainOptions& options)
    : data_(data),
      batch_size_(options.batch_size),
      ratio_(options.mask_ratio),
      rule_(options.mask_rule),
      rng_(mix_seed(options.seed, 1)) {
  if (data_.split.train.empty()) throw ContractError("no training sequences");
  if (batch_size_ < 1) throw ContractError("batch_size must be >= 1");
}

Batch BatchStream::next() {
  Batch batch;
  for (std::size_t b = 0; b < batch_size_; ++b) {
    const auto& seq = data_.split.train[rng_.below(data_.split.train.size())];
    batch.push_back(mask_tokens(seq, ratio_, rng_, rule_, data_.specials, data_.regular_vocab));
  }
  return batch;
}

Batch frozen_eval_batch(const TrainData& data, const TrainOptions& options) {
  if (data.split.eval.empty()) throw ContractError("no eval sequences");
  SeededRng rng(mix_seed(options.seed, 2));
  const std::size_t count = std::min(options.eval_sequences, data.split.eval.size());
  Batch batch;
  for (std::size_t i = 0; i < count; ++i) {
    batch.push_back(
        mask_tokens(data.split.eval[i], options.mask_ratio, rng, options.mask_rule, data.specials, data.regular_vocab));
  }
  return batch;
}

RunRecord train_run(const PTConfig& config, const HPPoint& hp, const TrainData& data, const TrainOptions& options,
                    const std::string& config_hash, ModelParams* final_params) {
  config.validate();
  hp.validate();
  if (options.steps < 1) throw ContractError("steps must be >= 1");
  if (config.vocab_size != data.vocab_size()) {
    throw ContractError("config vocab_size " + std::to_string(config.vocab_size) + " does not match corpus vocabulary " +
                        std::to_string(data.vocab_size()));
  }
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.config_hash = config_hash;
  rec.hp = hp;
  rec.seed = options.seed;
  rec.width = config.width;

  SeededRng init_rng(mix_seed(options.seed, 0));
  ModelParams params = init_model_params(config, init_rng, options.init);
  OptimState opt;
  opt.constants = options.adam;
  LrPolicy policy{hp.eta, config.width, options.output_lr_variant, options.hidden_lr_width};
  BatchStream stream(data, options);
  const Batch eval_batch = frozen_eval_batch(data, options);

  auto diverge = [&](std::size_t step) {
    rec.diverged = true;
    rec.diverged_step = step;
    rec.final_eval_loss = std::numeric_limits<double>::infinity();
  };
  auto evaluate = [&](std::size_t step) -> bool {
    double loss = std::numeric_limits<double>::quiet_NaN();
    try {
      loss = batch_loss(params, config, hp.weights, eval_batch);
    } catch (const NumericError&) {
    }
    if (!std::isfinite(loss)) {
      diverge(step);
      return false;
    }
    rec.eval.push_back({step, loss});
    return true;
  };

  if (evaluate(0)) {
    for (std::size_t step = 1; step <= options.steps; ++step) {
      const Batch batch = stream.next();
      BatchGrad bg;
      try {
        bg = batch_loss_and_grad(params, config, hp.weights, batch);
      } catch (const NumericError&) {
        diverge(step);
        break;
      }
      if (!std::isfinite(bg.loss)) {
        diverge(step);
        break;
      }
      rec.train_loss.push_back(bg.loss);
      adamw_step(params, bg.grads, opt, policy);
      const bool due = options.eval_interval > 0 && step % options.eval_interval == 0;
      if ((due || step == options.steps) && !evaluate(step)) break;
    }
  }
  if (!rec.diverged) rec.final_eval_loss = rec.eval.back().loss;
  if (options.record_wall_clock) {
    rec.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (final_params) *final_params = std::move(params);
  return rec;
}

}  // namespace mupt
