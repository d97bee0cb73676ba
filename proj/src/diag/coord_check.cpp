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


#include "mupt/diag/coord_check.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "mupt/core/error.hpp"
#include "mupt/model/mfvi.hpp"

namespace mupt {

namespace {

using Probes = std::map<std::string, std::vector<double>>;

void append(std::vector<double>& out, const Tensor& t) { out.insert(out.end(), t.values().begin(), t.values().end()); }

Probes probe(const ModelParams& params, const PTConfig& config, const InfoWeights& weights, const Batch& batch) {
  Probes p;
  for (const auto& s : batch) {
    Tape tape;
    ParamVars vars = ParamVars::bind(tape, params, false);
    MFVIGraph graph(tape, vars, config, weights, s.inputs);
    std::vector<SweepTrace> trace;
    StateVars st = graph.run(&trace);
    const SweepTrace& last = trace.back();
    append(p["nz"], st.nz.value());
    const Tensor& f = last.attn_logits.value();
    const std::size_t n = graph.length();
    for (std::size_t c = 0; c < f.dim(0); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) p["attn_logits"].push_back(f.at(c, i, j));
        }
        // the head softmax ignores a per-row shift
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j) m += i != j ? f.at(c, i, j) : 0.0;
        m /= static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) p["attn_centered"].push_back(f.at(c, i, j) - m);
        }
      }
    }
    append(p["z_logits"], last.z_logits.value());
    append(p["topic_logits"], last.topic_logits.value());
    append(p["out_logits"], graph.mlm_logits(st.nz).value());
  }
  return p;
}

CoordRow stats(std::size_t width, std::string name, std::size_t step, const std::vector<double>& v) {
  double sa = 0.0, s = 0.0;
  for (double x : v) {
    sa += std::abs(x);
    s += x;
  }
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return CoordRow{width, std::move(name), step, sa / n, ss / n};
}

void record(CoordReport& rep, std::size_t width, std::size_t step, const Probes& now, const Probes& base) {
  for (const auto& name : kActivationProbes) rep.rows.push_back(stats(width, name, step, now.at(name)));
  for (const auto& delta : kDeltaProbes) {
    const std::string source = delta.substr(6);
    const auto& a = now.at(source);
    const auto& b = base.at(source);
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    rep.rows.push_back(stats(width, delta, step, d));
  }
}

void check_ladder(const std::vector<std::size_t>& widths, std::size_t minimum, const char* who) {
  if (widths.size() < minimum) {
    throw ContractError(std::string(who) + ": insufficient points (need >= " + std::to_string(minimum) + " widths)");
  }
  for (std::size_t k = 1; k < widths.size(); ++k) {
    if (widths[k] <= widths[k - 1]) throw ContractError(std::string(who) + ": widths must be strictly increasing");
  }
}

TrainOptions stream_options(const CoordCheckOptions& o) {
  TrainOptions t;
  t.batch_size = o.batch_size;
  t.mask_ratio = o.mask_ratio;
  t.mask_rule = o.mask_rule;
  t.seed = o.seed;
  t.eval_sequences = o.probe_sequences;
  return t;
}

// One initialisation at one width; rows in probe order for steps 0..k.
std::vector<CoordRow> run_draw(const WidthScaler& scaler, std::size_t w, std::size_t draw, const TrainData& data,
                               const Batch& probe_batch, const CoordCheckOptions& o, std::string& failure) {
  const PTConfig config = scaler.scale(w);
  if (config.vocab_size != data.vocab_size()) throw ContractError("coord_check: vocab_size does not match corpus");
  SeededRng init_rng(mix_seed(o.seed, draw));
  ModelParams params = init_model_params(config, init_rng, o.init);
  OptimState opt;
  opt.constants = o.adam;
  const LrPolicy policy{o.hp.eta, w, o.output_lr_variant, o.hidden_lr_width};
  BatchStream stream(data, stream_options(o));
  CoordReport rep;
  const Probes base = probe(params, config, o.hp.weights, probe_batch);
  record(rep, w, 0, base, base);
  const std::string who = "width " + std::to_string(w) + " draw " + std::to_string(draw);
  for (std::size_t step = 1; step <= o.steps; ++step) {
    BatchGrad bg;
    try {
      bg = batch_loss_and_grad(params, config, o.hp.weights, stream.next());
    } catch (const NumericError&) {
      bg.loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(bg.loss)) {
      failure = who + " diverged at step " + std::to_string(step);
      break;
    }
    adamw_step(params, bg.grads, opt, policy);
    Probes now;
    try {
      now = probe(params, config, o.hp.weights, probe_batch);
    } catch (const NumericError&) {
      failure = who + " produced non-finite probes at step " + std::to_string(step);
      break;
    }
    record(rep, w, step, now, base);
  }
  return rep.rows;
}

CoordReport run_ladder(const WidthScaler& scaler, const std::vector<std::size_t>& widths, const TrainData& data,
                       const CoordCheckOptions& o) {
  o.hp.weights.validate();
  if (!(o.hp.eta >= 0.0)) throw ContractError("coord_check: eta must be >= 0");
  if (o.init_draws == 0) throw ContractError("coord_check: init_draws must be >= 1");
  CoordReport rep;
  rep.widths = widths;
  const Batch probe_batch = frozen_eval_batch(data, stream_options(o));
  for (std::size_t w : widths) {
    // statistics are means over independent initialisations; data are shared
    std::vector<CoordRow> acc;
    for (std::size_t d = 0; d < o.init_draws; ++d) {
      std::string failure;
      std::vector<CoordRow> rows = run_draw(scaler, w, d, data, probe_batch, o, failure);
      if (!failure.empty()) rep.failures.push_back(failure);
      if (d == 0) {
        acc = std::move(rows);
        continue;
      }
      if (rows.size() < acc.size()) acc.resize(rows.size());
      for (std::size_t k = 0; k < acc.size(); ++k) {
        acc[k].mean_abs += rows[k].mean_abs;
        acc[k].variance += rows[k].variance;
      }
    }
    const double n = static_cast<double>(o.init_draws);
    for (CoordRow& r : acc) {
      r.mean_abs /= n;
      r.variance /= n;
      rep.rows.push_back(std::move(r));
    }
  }
  return rep;
}

}  // namespace

CoordReport coord_check(const WidthScaler& scaler, const std::vector<std::size_t>& widths, const TrainData& data,
                        const CoordCheckOptions& options) {
  check_ladder(widths, 3, "coord_check");
  return run_ladder(scaler, widths, data, options);
}

VarianceScan logit_variance_scan(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                 std::size_t seeds_per_width, double control_sigma, std::size_t seq_len,
                                 std::uint64_t seed) {
  check_ladder(widths, 5, "logit_variance_scan");
  if (seeds_per_width < 20) throw ContractError("logit_variance_scan: need >= 20 seeds per width");
  VarianceScan out;
  out.widths = widths;
  for (std::size_t w : widths) {
    PTConfig config = scaler.scale(w);
    const std::size_t n = std::min(seq_len, config.max_len);
    InitOptions init;
    init.output_sigma = control_sigma > 0.0 ? control_sigma : -1.0;
    double acc = 0.0;
    for (std::size_t s = 0; s < seeds_per_width; ++s) {
      SeededRng rng(mix_seed(seed, 1000 + s));
      const ModelParams params = init_model_params(config, rng, init);
      std::vector<int> tokens(n);
      for (int& t : tokens) t = static_cast<int>(rng.below(config.vocab_size));
      const MFVIState st = run_mfvi(tokens, params, InfoWeights{}, config);
      acc += variance(mlm_logits(st, params, config));
    }
    out.variances.push_back(acc / static_cast<double>(seeds_per_width));
  }
  std::vector<double> x(widths.begin(), widths.end());
  out.fit = fit_loglog(x, out.variances);
  return out;
}

UpdateMagnitude update_magnitude_check(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                       const TrainData& data, const CoordCheckOptions& options) {
  check_ladder(widths, 2, "update_magnitude_check");
  CoordCheckOptions o = options;
  o.steps = 1;
  const CoordReport rep = run_ladder(scaler, widths, data, o);
  if (!rep.failures.empty()) throw NumericError("update_magnitude_check: " + rep.failures.front());
  UpdateMagnitude out;
  out.widths = widths;
  for (std::size_t w : widths) out.delta.push_back(rep.row(w, "delta_nz", 1).mean_abs);
  auto ratio = [](double a, double b) {
    if (a == 0.0 && b == 0.0) return 1.0;
    if (a == 0.0) return std::numeric_limits<double>::infinity();
    return b / a;
  };
  for (std::size_t k = 1; k < out.delta.size(); ++k) {
    const double r = ratio(out.delta[k - 1], out.delta[k]);
    out.max_consecutive_ratio = std::max(out.max_consecutive_ratio, std::max(r, 1.0 / r));
  }
  out.first_last_ratio = ratio(out.delta.front(), out.delta.back());
  return out;
}

namespace {

nlohmann::json band_json(const BandCheck& b) {
  return {{"passed", b.passed}, {"worst_ratio", b.worst_ratio}, {"where", b.where}};
}

}  // namespace

bool CoordSuite::passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return !assertions.empty();
}

CoordSuite run_coord_suite(const WidthScaler& scaler, const std::vector<std::size_t>& widths, const TrainData& data,
                           const CoordCheckOptions& options, double lo, double hi) {
  CoordSuite s;
  CoordCheckOptions ctrl = options;
  ctrl.hidden_lr_width = widths.front();
  s.mup = coord_check(scaler, widths, data, options);
  s.control = coord_check(scaler, widths, data, ctrl);
  s.update_mup = update_magnitude_check(scaler, widths, data, options);
  s.update_control = update_magnitude_check(scaler, widths, data, ctrl);

  const std::vector<std::string> act = {"nz", "attn_logits", "z_logits"};
  const std::vector<std::string> del = {"delta_nz", "delta_attn_logits", "delta_z_logits"};
  const BandCheck act_band = check_band(s.mup, act, 0, options.steps, lo, hi);
  const BandCheck del_band = check_band(s.mup, del, 1, options.steps, lo, hi);
  const BandCheck ctrl_band = check_band(s.control, del, 1, options.steps, lo, hi);
  bool attn_ok = true;
  std::vector<double> attn_var;
  for (std::size_t w : widths) attn_var.push_back(s.mup.row(w, "attn_centered", 0).variance);
  for (std::size_t k = 1; k < attn_var.size(); ++k) attn_ok = attn_ok && attn_var[k] <= hi * attn_var[k - 1];

  const bool clean = s.mup.failures.empty();
  auto& as = s.assertions;
  as.push_back({"mup_activation_band", act_band.passed && clean, band_json(act_band)});
  as.push_back({"mup_delta_band", del_band.passed && clean, band_json(del_band)});
  as.push_back({"control_violates_band", !ctrl_band.passed, band_json(ctrl_band)});
  as.push_back({"attn_variance_init_non_increasing", attn_ok && clean, {{"variance", attn_var}}});
  as.push_back({"update_magnitude_mup", s.update_mup.max_consecutive_ratio <= hi,
                {{"delta", s.update_mup.delta}, {"max_consecutive_ratio", s.update_mup.max_consecutive_ratio}}});
  as.push_back({"update_magnitude_control", s.update_control.first_last_ratio >= 2.0,
                {{"delta", s.update_control.delta}, {"first_last_ratio", s.update_control.first_last_ratio}}});
  return s;
}

}  // namespace mupt
