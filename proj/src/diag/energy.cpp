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


#include "mupt/diag/energy.hpp"

#include <cmath>

#include "mupt/core/error.hpp"

namespace mupt {

MFVIState uniform_state(std::size_t n, const PTConfig& c) {
  if (n < 2) throw ContractError("head selection undefined for single-token sequence");
  MFVIState s;
  s.qz = Tensor(Shape{n, c.width}, 1.0 / static_cast<double>(c.width));
  s.qh = Tensor(Shape{c.channels, n, n}, 1.0 / static_cast<double>(n - 1));
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    for (std::size_t i = 0; i < n; ++i) s.qh.at(ch, i, i) = 0.0;
  }
  s.qg = Tensor(Shape{n, c.topics}, 1.0 / static_cast<double>(c.topics));
  return s;
}

std::vector<EnergyTerms> energy_terms(std::span<const int> tokens, const MFVIState& state, const ModelParams& params,
                                      const PTConfig& c) {
  const std::size_t n = tokens.size(), N = c.width, M = c.topics, r = c.rank;
  if (state.qz.shape() != Shape{n, N} || state.qh.shape() != Shape{c.channels, n, n} || state.qg.shape() != Shape{n, M}) {
    throw ShapeError("energy_terms: state does not match tokens and config");
  }
  const double tau = c.temperature();
  // Low-rank projections of Q (not N Q): a = Q U_c, b = Q V_c.
  Tensor qu(Shape{c.channels, n, r}), qv(Shape{c.channels, n, r});
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < N; ++a) {
        const double q = state.qz.at(i, a);
        if (q == 0.0) continue;
        const double* u = params.U.data() + (ch * N + a) * r;
        const double* v = params.V.data() + (ch * N + a) * r;
        for (std::size_t l = 0; l < r; ++l) {
          qu.at(ch, i, l) += q * u[l];
          qv.at(ch, i, l) += q * v[l];
        }
      }
    }
  }
  std::vector<EnergyTerms> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    EnergyTerms& e = out[i];
    const auto tok = static_cast<std::size_t>(tokens[i]);
    double un = 0.0, h = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
      const double q = state.qz.at(i, a);
      un += q * params.S.at(tok, a);
      if (q > 0.0) h -= q * std::log(q);
    }
    e.e_unary = tau * un;
    e.tau_entropy = tau * h;
    double bin = 0.0;
    for (std::size_t g = 0; g < M; ++g) {
      const double qg = state.qg.at(i, g);
      double row = 0.0;
      for (std::size_t a = 0; a < N; ++a) row += state.qz.at(i, a) * params.B.at(g, a);
      bin += qg * row;
    }
    e.e_binary = tau * static_cast<double>(M) * bin;
    double tern = 0.0;
    for (std::size_t ch = 0; ch < c.channels; ++ch) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double dot = 0.0;
        for (std::size_t l = 0; l < r; ++l) dot += qu.at(ch, i, l) * qv.at(ch, j, l);
        tern += state.qh.at(ch, i, j) * dot;
      }
    }
    e.e_ternary = tau * static_cast<double>(N) * tern;
  }
  return out;
}

const MagnitudeSeries& EnergyProbe::get(const std::string& quantity) const {
  for (const auto& s : series) {
    if (s.quantity == quantity) return s;
  }
  throw ContractError("energy probe has no quantity " + quantity);
}

EnergyProbe energy_entropy_probe(const WidthScaler& scaler, const std::vector<std::size_t>& widths,
                                 const EnergyProbeOptions& o, const TrainData* data, const TrainOptions* train,
                                 const HPPoint* hp) {
  if (widths.size() < 4) throw ContractError("energy_entropy_probe: insufficient points (need >= 4 widths)");
  if (o.seeds < 1) throw ContractError("energy_entropy_probe: seeds must be >= 1");
  if (o.trained_steps > 0 && (!data || !train || !hp)) {
    throw ContractError("energy_entropy_probe: the trained stage needs data, train options and an HP point");
  }
  EnergyProbe probe;
  probe.paradigm = scaler.paradigm();
  probe.trained_steps = o.trained_steps;
  const char* names[] = {"e_unary", "e_binary", "e_ternary", "tau_entropy"};
  for (const char* q : names) probe.series.push_back(MagnitudeSeries{q, widths, {}, {}, false});

  for (std::size_t w : widths) {
    const PTConfig config = scaler.scale(w);
    const std::size_t n = std::min(o.seq_len, config.max_len);
    double acc[4] = {0, 0, 0, 0};
    std::size_t count = 0;
    for (std::size_t s = 0; s < o.seeds; ++s) {
      std::vector<std::vector<int>> seqs;
      ModelParams params;
      std::vector<MFVIState> states;
      if (o.trained_steps == 0) {
        SeededRng rng(mix_seed(o.seed, 2000 + s));
        params = init_model_params(config, rng);
        std::vector<int> tokens(n);
        for (int& t : tokens) t = static_cast<int>(rng.below(config.vocab_size));
        seqs.push_back(tokens);
        states.push_back(uniform_state(n, config));
      } else {
        TrainOptions t = *train;
        t.steps = o.trained_steps;
        t.seed = mix_seed(o.seed, 2000 + s);
        train_run(config, *hp, *data, t, "", &params);
        const Batch eval = frozen_eval_batch(*data, t);
        for (const auto& m : eval) {
          seqs.push_back(m.inputs);
          states.push_back(run_mfvi(m.inputs, params, hp->weights, config));
        }
      }
      for (std::size_t k = 0; k < seqs.size(); ++k) {
        const auto terms = energy_terms(seqs[k], states[k], params, config);
        for (const auto& e : terms) {
          acc[0] += std::abs(e.e_unary);
          acc[1] += std::abs(e.e_binary);
          acc[2] += std::abs(e.e_ternary);
          acc[3] += std::abs(e.tau_entropy);
          if (o.trained_steps == 0) {
            const double closed = config.temperature() * std::log(static_cast<double>(config.width));
            probe.entropy_closed_form_error =
                std::max(probe.entropy_closed_form_error, std::abs(e.tau_entropy - closed) / closed);
          }
          ++count;
        }
      }
    }
    for (int q = 0; q < 4; ++q) probe.series[static_cast<std::size_t>(q)].magnitudes.push_back(acc[q] / static_cast<double>(count));
  }
  std::vector<double> x(widths.begin(), widths.end());
  for (auto& s : probe.series) {
    bool positive = true;
    for (double m : s.magnitudes) positive = positive && m > 0.0;
    if (!positive) {
      s.skipped = true;
      probe.warnings.push_back(s.quantity + " has a zero magnitude; fit skipped");
      continue;
    }
    s.fit = fit_loglog(x, s.magnitudes);
  }
  return probe;
}

nlohmann::json to_json(const EnergyProbe& p) {
  nlohmann::json j;
  j["paradigm"] = std::string(to_string(p.paradigm));
  j["stage"] = p.trained_steps == 0 ? std::string("init") : "trained(" + std::to_string(p.trained_steps) + ")";
  nlohmann::json fits = nlohmann::json::object();
  for (const auto& s : p.series) {
    nlohmann::json f{{"widths", s.widths}, {"magnitudes", s.magnitudes}, {"skipped", s.skipped}};
    if (!s.skipped) {
      f["slope"] = s.fit.slope;
      f["intercept"] = s.fit.intercept;
      f["residual"] = s.fit.residual;
    }
    fits[s.quantity] = f;
  }
  j["fits"] = fits;
  if (p.trained_steps == 0) j["entropy_closed_form_error"] = p.entropy_closed_form_error;
  j["warnings"] = p.warnings;
  return j;
}

}  // namespace mupt
