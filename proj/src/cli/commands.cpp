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


#include "mupt/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mupt/core/error.hpp"
#include "mupt/core/kernels.hpp"
#include "mupt/diag/coord_check.hpp"
#include "mupt/diag/energy.hpp"
#include "mupt/diag/equivalence.hpp"
#include "mupt/exp/local_opt.hpp"
#include "mupt/exp/svg.hpp"
#include "mupt/exp/sweep.hpp"
#include "mupt/model/checkpoint.hpp"

namespace mupt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Env {
  const RunConfig& cfg;
  std::ostream& log;
  std::string hash;
  fs::path dir;

  fs::path artifact(const std::string& stem, const std::string& ext) const {
    return dir / (stem + "-" + hash + ext);
  }
  void write(const fs::path& path, const std::string& text) const {
    write_text_file(path.string(), text);
    log << "wrote " << path.string() << "\n";
  }
  void write_json(const fs::path& path, const json& j) const { write(path, j.dump(2) + "\n"); }
};

struct Loaded {
  Corpus corpus;
  TrainData data;
};

Loaded load_data(const RunConfig& cfg) {
  Loaded l;
  l.corpus = encode_corpus(read_corpus_source(cfg.corpus), cfg.tokenizer, cfg.word_vocab);
  l.data = make_train_data(l.corpus, cfg.seq_len, cfg.eval_fraction);
  return l;
}

std::size_t byte_vocab() { return 259; }

TrainOptions train_options(const RunConfig& cfg) {
  TrainOptions t;
  t.steps = cfg.steps;
  t.batch_size = cfg.batch_size;
  t.eval_interval = cfg.eval_interval;
  t.eval_sequences = cfg.eval_sequences;
  t.mask_ratio = cfg.mask_ratio;
  t.mask_rule = cfg.mask_rule;
  t.output_lr_variant = cfg.output_lr_variant;
  t.adam.warmup_steps = cfg.warmup_steps;
  t.seed = cfg.seed;
  return t;
}

CoordCheckOptions coord_options(const RunConfig& cfg) {
  CoordCheckOptions o;
  o.steps = cfg.coord_steps;
  o.init_draws = cfg.coord_draws;
  o.hp = cfg.hp;
  o.batch_size = cfg.batch_size;
  o.mask_ratio = cfg.mask_ratio;
  o.mask_rule = cfg.mask_rule;
  o.output_lr_variant = cfg.output_lr_variant;
  o.adam.warmup_steps = cfg.warmup_steps;
  o.seed = cfg.seed;
  return o;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int finish(const Env& env, const std::string& kind, json data, const std::vector<Assertion>& asserts) {
  const json summary = summary_json(kind, std::move(data), asserts);
  env.write_json(env.artifact(kind, ".json"), summary);
  for (const auto& a : asserts) env.log << (a.passed ? "PASS " : "FAIL ") << a.name << "\n";
  return summary["all_passed"].get<bool>() ? kExitOk : kExitAssertion;
}

int cmd_train(const Env& env) {
  const Loaded l = load_data(env.cfg);
  const PTConfig config = env.cfg.model_config(l.data.vocab_size());
  ModelParams params;
  const RunRecord rec = train_run(config, env.cfg.hp, l.data, train_options(env.cfg), env.hash, &params);
  env.write_json(env.artifact("run", ".json"), to_json(rec));
  SweepResult single;
  single.widths = {config.width};
  single.lrs = {env.cfg.hp.eta};
  single.cells.push_back(SweepCell{config.width, env.cfg.hp.eta, rec});
  std::ostringstream csv;
  write_sweep_csv(csv, single);
  env.write(env.artifact("run", ".csv"), csv.str());
  Checkpoint ck{config, params, json{{"config_hash", env.hash}, {"steps", env.cfg.steps}}};
  save_checkpoint(env.artifact("model", ".ckpt"), ck);
  env.log << "wrote " << env.artifact("model", ".ckpt").string() << "\n";
  if (rec.diverged) {
    env.log << "run diverged at step " << rec.diverged_step << "\n";
    return kExitAssertion;
  }
  env.log << "final eval loss " << rec.final_eval_loss << "\n";
  return kExitOk;
}

int cmd_coord_check(const Env& env) {
  const Loaded l = load_data(env.cfg);
  const WidthScaler scaler = env.cfg.scaler(l.data.vocab_size());
  CoordCheckOptions o = coord_options(env.cfg);
  const auto& widths = env.cfg.widths;
  const CoordSuite suite = run_coord_suite(scaler, widths, l.data, o);
  const CoordReport& mup = suite.mup;
  const CoordReport& control = suite.control;
  std::ostringstream a, b;
  write_coord_csv(a, mup);
  write_coord_csv(b, control);
  env.write(env.artifact("coord", ".csv"), a.str());
  env.write(env.artifact("coord-control", ".csv"), b.str());
  const std::vector<Assertion>& as = suite.assertions;
  json data{{"widths", widths}, {"steps", o.steps}, {"failures", mup.failures}, {"control_failures", control.failures}};
  return finish(env, "coord", data, as);
}

int cmd_init_stats(const Env& env) {
  const std::size_t vocab = env.cfg.tokenizer == TokenizerKind::Byte ? byte_vocab() : load_data(env.cfg).data.vocab_size();
  const PTConfig config = env.cfg.model_config(vocab);
  SeededRng rng(mix_seed(env.cfg.seed, 0));
  const ModelParams params = init_model_params(config, rng);
  const LrPolicy policy{env.cfg.hp.eta, config.width, env.cfg.output_lr_variant, std::nullopt};
  json groups = json::object();
  std::vector<Assertion> as;
  params.for_each([&](std::string_view name, const Tensor& t) {
    const ParamGroup g = classify_param(name);
    const double sigma = init_sigma(g, config.width);
    const double var = variance(t);
    double second = 0.0;
    for (double v : t.values()) second += v * v;
    second /= static_cast<double>(t.size());
    groups[std::string(name)] = {{"group", std::string(to_string(g))}, {"shape", t.shape()}, {"init_sigma", sigma},
                                 {"lr", policy.lr_for(name)}, {"empirical_variance", var}, {"decay", decays(name)}};
    bool ok = false;
    if (g == ParamGroup::Bias) {
      ok = std::all_of(t.values().begin(), t.values().end(), [](double v) { return v == 0.0; });
    } else if (t.size() >= 10000) {
      ok = std::abs(second / (sigma * sigma) - 1.0) <= 0.15;
    } else {
      ok = true;  // too few samples for the variance band
    }
    as.push_back({"init_" + std::string(name), ok, {{"empirical_second_moment", second}, {"target", sigma * sigma}}});
  });
  json data{{"config", to_json(config)}, {"parameters", groups}, {"parameter_count", parameter_count(config)}};
  if (env.cfg.scan_widths.size() >= 5 && env.cfg.scan_seeds >= 20) {
    const WidthScaler scaler = env.cfg.scaler(vocab);
    const VarianceScan scan = logit_variance_scan(scaler, env.cfg.scan_widths, env.cfg.scan_seeds, -1.0, 16, env.cfg.seed);
    const VarianceScan ctrl = logit_variance_scan(scaler, env.cfg.scan_widths, env.cfg.scan_seeds,
                                                  1.0 / static_cast<double>(env.cfg.base_width), 16, env.cfg.seed);
    data["logit_variance_scan"] = {{"widths", scan.widths}, {"variances", scan.variances}, {"slope", scan.fit.slope},
                                   {"control_variances", ctrl.variances}, {"control_slope", ctrl.fit.slope}};
    as.push_back({"logit_variance_slope", std::abs(scan.fit.slope + 1.0) <= 0.3, {{"slope", scan.fit.slope}}});
    as.push_back({"logit_variance_control_slope", std::abs(ctrl.fit.slope - 1.0) <= 0.3, {{"slope", ctrl.fit.slope}}});
  } else {
    data["logit_variance_scan"] = "skipped: needs >= 5 scan_widths and >= 20 scan_seeds";
  }
  return finish(env, "init-stats", data, as);
}

int cmd_equivalence(const Env& env) {
  const std::size_t vocab = env.cfg.tokenizer == TokenizerKind::Byte ? byte_vocab() : load_data(env.cfg).data.vocab_size();
  const PTConfig config = env.cfg.model_config(vocab);
  json seeds = json::array();
  double worst = 0.0;
  std::string where;
  for (std::size_t s = 0; s < env.cfg.equivalence_seeds; ++s) {
    const EquivalenceReport r = equivalence_check(config, env.cfg.seed + s);
    json row = to_json(r);
    row["seed"] = env.cfg.seed + s;
    seeds.push_back(row);
    if (r.max_deviation >= worst) {
      worst = r.max_deviation;
      where = r.worst;
    }
  }
  env.log << "max relative deviation " << worst << " (" << where << ")\n";
  json data{{"config", to_json(config)}, {"max_deviation", worst}, {"worst", where}, {"seeds", seeds}};
  return finish(env, "equivalence", data,
                {{"equivalence", worst <= env.cfg.equivalence_tol,
                  {{"max_deviation", worst}, {"tolerance", env.cfg.equivalence_tol}, {"worst", where}}}});
}

int cmd_energy(const Env& env) {
  const std::size_t steps = env.cfg.energy_steps;
  std::optional<Loaded> l;
  if (steps > 0 || env.cfg.tokenizer != TokenizerKind::Byte) l = load_data(env.cfg);
  const std::size_t vocab = l ? l->data.vocab_size() : byte_vocab();
  const WidthScaler scaler = env.cfg.scaler(vocab);
  EnergyProbeOptions o;
  o.seeds = env.cfg.energy_seeds;
  o.seq_len = env.cfg.seq_len;
  o.trained_steps = steps;
  o.seed = env.cfg.seed;
  const TrainOptions t = train_options(env.cfg);
  const EnergyProbe probe =
      energy_entropy_probe(scaler, env.cfg.energy_widths, o, l ? &l->data : nullptr, &t, &env.cfg.hp);
  std::ostringstream csv;
  csv << "width,quantity,magnitude\n";
  for (const auto& s : probe.series) {
    for (std::size_t k = 0; k < s.widths.size(); ++k) csv << s.widths[k] << "," << s.quantity << "," << csv_number(s.magnitudes[k]) << "\n";
  }
  env.write(env.artifact("energy", ".csv"), csv.str());
  std::vector<Assertion> as;
  if (steps == 0) {
    const bool channels = env.cfg.paradigm == Paradigm::ScaleChannels;
    const double h_target = channels ? 1.0 : 0.0;
    const double e_target = channels ? 0.5 : -0.5;
    auto slope = [&](const char* q) {
      const auto& s = probe.get(q);
      return s.skipped ? std::nan("") : s.fit.slope;
    };
    as.push_back({"tau_entropy_slope", std::abs(slope("tau_entropy") - h_target) <= 0.15,
                  {{"slope", slope("tau_entropy")}, {"target", h_target}}});
    as.push_back({"e_unary_slope", std::abs(slope("e_unary") - e_target) <= 0.2, {{"slope", slope("e_unary")}, {"target", e_target}}});
    as.push_back({"e_binary_slope", std::abs(slope("e_binary") - e_target) <= 0.2,
                  {{"slope", slope("e_binary")}, {"target", e_target}}});
    as.push_back({"entropy_closed_form", probe.entropy_closed_form_error <= 1e-12,
                  {{"max_relative_error", probe.entropy_closed_form_error}}});
  }
  return finish(env, "energy", to_json(probe), as);
}

std::string sweep_svg(const SweepResult& r) {
  SvgPlot plot;
  plot.title = "Final eval loss against learning rate";
  plot.x_label = "base learning rate eta";
  plot.y_label = "final eval loss";
  plot.log_x = true;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  for (std::size_t w = 0; w < r.widths.size(); ++w) {
    SvgSeries s{"N=" + std::to_string(r.widths[w]), {}, colors[w % 6], true};
    SvgSeries best{"argmin N=" + std::to_string(r.widths[w]), {}, colors[w % 6], false, 5.0};
    for (std::size_t k = 0; k < r.lrs.size(); ++k) {
      const auto& c = r.cell(w, k);
      if (!c.record.diverged) s.points.emplace_back(c.lr, c.record.final_eval_loss);
      if (k == r.argmin[w]) best.points.emplace_back(c.lr, c.record.final_eval_loss);
    }
    plot.series.push_back(s);
    plot.series.push_back(best);
  }
  return plot.render();
}

int cmd_transfer_sweep(const Env& env) {
  const Loaded l = load_data(env.cfg);
  const WidthScaler scaler = env.cfg.scaler(l.data.vocab_size());
  const std::vector<double> grid = env.cfg.lr_grid.empty() ? half_decade_grid(env.cfg.hp.eta, 5) : env.cfg.lr_grid;
  const SweepResult r =
      transfer_sweep(scaler, env.cfg.sweep_widths, grid, env.cfg.hp.weights, l.data, train_options(env.cfg), env.hash);
  std::ostringstream csv;
  write_sweep_csv(csv, r);
  env.write(env.artifact("sweep", ".csv"), csv.str());
  env.write(env.artifact("sweep", ".svg"), sweep_svg(r));
  return finish(env, "sweep", to_json(r),
                {{"argmin_displacement", r.max_displacement <= 1, {{"max_displacement", r.max_displacement}}}});
}

int cmd_verify_local_opt(const Env& env) {
  LocalOptOptions o;
  o.p = env.cfg.p;
  o.alpha = env.cfg.alpha;
  o.halfwidth = env.cfg.halfwidth;
  o.max_runs = env.cfg.max_runs;
  o.sample_seed = env.cfg.seed;
  check_local_opt_budget(o);
  const Loaded l = load_data(env.cfg);
  const PTConfig config = env.cfg.model_config(l.data.vocab_size());
  const LocalOptReport rep =
      verify_local_optimality(env.cfg.hp, o, config, l.data, train_options(env.cfg), env.hash);
  std::ostringstream csv;
  write_local_opt_csv(csv, rep);
  env.write(env.artifact("localopt", ".csv"), csv.str());
  env.write(env.artifact("localopt-scatter", ".svg"), local_opt_scatter_svg(rep));
  env.write(env.artifact("localopt-rank", ".svg"), local_opt_rank_svg(rep));
  const json j = to_json(rep);
  env.log << j["statement"].get<std::string>() << "\n";
  return finish(env, "localopt", j, {});
}

// ---- plot ----

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    throw ContractError("CSV has no column " + name);
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open plot input: " + path);
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw ContractError("plot input is empty: " + path);
  csv.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != csv.header.size()) {
      throw ContractError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(csv.header.size()) + " fields");
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

double to_num(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ContractError("not a number in CSV: " + s);
  }
}

const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[k % 8];
}

int cmd_plot(const Env& env, const std::string& input) {
  if (input.empty()) throw ContractError("plot needs --input <csv>");
  const Csv csv = read_csv(input);
  const std::string stem = fs::path(input).stem().string();
  std::vector<std::pair<std::string, std::string>> out;  // name suffix, svg
  if (csv.header == std::vector<std::string>{"width", "lr", "seed", "step", "split", "loss"}) {
    std::map<std::string, SvgSeries> curves;
    // width -> lr -> (last step, loss at that step)
    std::map<std::string, std::map<double, std::pair<double, double>>> finals;
    for (const auto& r : csv.rows) {
      if (r[4] != "eval") continue;
      const std::string key = "N=" + r[0] + " lr=" + r[1];
      auto& s = curves[key];
      s.name = key;
      s.line = true;
      s.points.emplace_back(to_num(r[3]), to_num(r[5]));
      auto& f = finals["N=" + r[0]][to_num(r[1])];
      if (to_num(r[3]) >= f.first) f = {to_num(r[3]), to_num(r[5])};
    }
    std::map<std::string, SvgSeries> by_width;
    for (const auto& [width, per_lr] : finals) {
      auto& w = by_width[width];
      w.name = width;
      w.line = true;
      for (const auto& [lr, f] : per_lr) w.points.emplace_back(lr, f.second);
    }
    SvgPlot curve_plot{"Eval loss curves", "step", "eval loss", false, {}, {}, 760, 460};
    std::size_t k = 0;
    for (auto& [name, s] : curves) {
      s.color = palette(k++);
      curve_plot.series.push_back(s);
    }
    SvgPlot lr_plot{"Final eval loss against learning rate", "learning rate", "final eval loss", true, {}, {}};
    k = 0;
    for (auto& [name, s] : by_width) {
      s.color = palette(k++);
      lr_plot.series.push_back(s);
    }
    out.emplace_back("curves", curve_plot.render());
    out.emplace_back("lr", lr_plot.render());
  } else if (csv.header == std::vector<std::string>{"sample_id", "distance", "loss", "loss_increase_rel"}) {
    LocalOptReport rep;
    for (const auto& r : csv.rows) {
      LocalOptSample s;
      s.id = static_cast<std::size_t>(to_num(r[0]));
      s.distance = to_num(r[1]);
      s.loss = to_num(r[2]);
      s.loss_increase_rel = to_num(r[3]);
      rep.samples.push_back(s);
    }
    if (rep.samples.empty() || rep.samples[0].id != 0) throw ContractError("local-opt CSV must start with sample 0 (base)");
    rep.base_loss = rep.samples[0].loss;
    for (const auto& s : rep.samples) rep.base_rank += s.id != 0 && s.loss < rep.base_loss;
    out.emplace_back("scatter", local_opt_scatter_svg(rep));
    out.emplace_back("rank", local_opt_rank_svg(rep));
  } else if (csv.header == std::vector<std::string>{"width", "probe", "step", "mean_abs", "variance"}) {
    std::map<std::string, std::map<std::string, SvgSeries>> probes;
    for (const auto& r : csv.rows) {
      auto& s = probes[r[1]]["N=" + r[0]];
      s.name = "N=" + r[0];
      s.line = true;
      s.points.emplace_back(to_num(r[2]), to_num(r[3]));
    }
    for (auto& [probe, series] : probes) {
      SvgPlot p{"mean |coordinate| of " + probe, "step", "mean abs", false, {}, {}};
      std::size_t k = 0;
      for (auto& [name, s] : series) {
        s.color = palette(k++);
        p.series.push_back(s);
      }
      out.emplace_back(probe, p.render());
    }
  } else {
    throw ContractError("plot: unrecognized CSV header in " + input);
  }
  for (const auto& [suffix, svg] : out) env.write(env.artifact("plot-" + stem + "-" + suffix, ".svg"), svg);
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"train",         "coord-check",    "init-stats",       "equivalence-check",
                                                 "energy-probe", "transfer-sweep", "verify-local-opt", "plot"};
  return names;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandContext& ctx) {
  cfg.validate();
  std::ostream& log = ctx.log ? *ctx.log : std::cout;
  const std::string dir = cfg.out_dir.empty() ? "out" : cfg.out_dir;
  Env env{cfg, log, config_hash(cfg), fs::path(dir)};
  if (std::find(command_names().begin(), command_names().end(), name) == command_names().end()) {
    throw ContractError("unknown command: " + name);
  }
  kernels::set_threads(static_cast<int>(cfg.threads));
  if (name == "verify-local-opt") {
    // Budget is checked before the output directory or any training is touched.
    LocalOptOptions o;
    o.p = cfg.p;
    o.alpha = cfg.alpha;
    o.max_runs = cfg.max_runs;
    check_local_opt_budget(o);
  }
  fs::create_directories(env.dir);
  log << name << " config " << env.hash << "\n";
  if (name == "train") return cmd_train(env);
  if (name == "coord-check") return cmd_coord_check(env);
  if (name == "init-stats") return cmd_init_stats(env);
  if (name == "equivalence-check") return cmd_equivalence(env);
  if (name == "energy-probe") return cmd_energy(env);
  if (name == "transfer-sweep") return cmd_transfer_sweep(env);
  if (name == "verify-local-opt") return cmd_verify_local_opt(env);
  return cmd_plot(env, ctx.input);
}

}  // namespace mupt
