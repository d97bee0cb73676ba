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


#include "mupt/cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mupt/core/error.hpp"

namespace mupt {

namespace {

using nlohmann::json;

json defaults_json() {
  RunConfig c;
  return to_json(c);
}

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ContractError(std::string("invalid value for field ") + key + ": " + j.at(key).dump());
  }
}

std::size_t get_size(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ContractError(std::string("invalid value for field ") + key + ": expected a non-negative integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

std::optional<std::size_t> get_opt_size(const json& j, const char* key) {
  if (j.at(key).is_null()) return std::nullopt;
  return get_size(j, key);
}

std::vector<std::size_t> get_sizes(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ContractError(std::string("invalid value for field ") + key + ": expected an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      throw ContractError(std::string("invalid value for field ") + key + ": entries must be positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

template <class F>
auto parse_enum(const json& j, const char* key, F parse) {
  try {
    return parse(get_field<std::string>(j, key));
  } catch (const ContractError& e) {
    throw ContractError(std::string("invalid value for field ") + key + ": " + e.what());
  }
}

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ContractError(std::string("invalid value for field ") + field + ": " + why);
}

void check_ladder(const std::vector<std::size_t>& w, const char* field) {
  require(!w.empty(), field, "must not be empty");
  for (std::size_t k = 1; k < w.size(); ++k) require(w[k] > w[k - 1], field, "must be strictly increasing");
}

}  // namespace

json to_json(const RunConfig& c) {
  auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["width"] = c.width;
  j["rank"] = opt(c.rank);
  j["channels"] = opt(c.channels);
  j["topics"] = opt(c.topics);
  j["base_width"] = c.base_width;
  j["base_rank"] = c.base_rank;
  j["base_channels"] = c.base_channels;
  j["base_topics"] = c.base_topics;
  j["mfvi_iters"] = c.mfvi_iters;
  j["seq_len"] = c.seq_len;
  j["paradigm"] = std::string(to_string(c.paradigm));
  j["pos_bias"] = c.pos_bias;
  j["pos_buckets"] = c.pos_buckets;
  const auto a = c.hp.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) j[std::string(HPPoint::kNames[i])] = a[i];
  j["corpus"] = c.corpus;
  j["tokenizer"] = std::string(to_string(c.tokenizer));
  j["word_vocab"] = c.word_vocab;
  j["eval_fraction"] = c.eval_fraction;
  j["eval_sequences"] = c.eval_sequences;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["eval_interval"] = c.eval_interval;
  j["warmup_steps"] = c.warmup_steps;
  j["mask_ratio"] = c.mask_ratio;
  j["mask_rule"] = std::string(to_string(c.mask_rule));
  j["output_lr_variant"] = std::string(to_string(c.output_lr_variant));
  j["seed"] = c.seed;
  j["widths"] = c.widths;
  j["coord_steps"] = c.coord_steps;
  j["coord_draws"] = c.coord_draws;
  j["scan_widths"] = c.scan_widths;
  j["scan_seeds"] = c.scan_seeds;
  j["equivalence_seeds"] = c.equivalence_seeds;
  j["equivalence_tol"] = c.equivalence_tol;
  j["energy_widths"] = c.energy_widths;
  j["energy_seeds"] = c.energy_seeds;
  j["energy_steps"] = c.energy_steps;
  j["sweep_widths"] = c.sweep_widths;
  j["lr_grid"] = c.lr_grid;
  j["p"] = c.p;
  j["alpha"] = c.alpha;
  j["halfwidth"] = c.halfwidth;
  j["max_runs"] = c.max_runs;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  return j;
}

RunConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ContractError("config must be a JSON object");
  json j = defaults_json();
  for (const auto& [key, value] : user.items()) {
    if (!j.contains(key)) throw ContractError("unknown key: " + key);
    j[key] = value;
  }
  RunConfig c;
  c.width = get_size(j, "width");
  c.rank = get_opt_size(j, "rank");
  c.channels = get_opt_size(j, "channels");
  c.topics = get_opt_size(j, "topics");
  c.base_width = get_size(j, "base_width");
  c.base_rank = get_size(j, "base_rank");
  c.base_channels = get_size(j, "base_channels");
  c.base_topics = get_size(j, "base_topics");
  c.mfvi_iters = get_size(j, "mfvi_iters");
  c.seq_len = get_size(j, "seq_len");
  c.paradigm = parse_enum(j, "paradigm", parse_paradigm);
  c.pos_bias = get_field<bool>(j, "pos_bias");
  c.pos_buckets = get_size(j, "pos_buckets");
  std::array<double, 7> a{};
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = get_field<double>(j, std::string(HPPoint::kNames[i]).c_str());
  c.hp = HPPoint::from_array(a);
  c.corpus = get_field<std::string>(j, "corpus");
  c.tokenizer = parse_enum(j, "tokenizer", parse_tokenizer);
  c.word_vocab = get_size(j, "word_vocab");
  c.eval_fraction = get_field<double>(j, "eval_fraction");
  c.eval_sequences = get_size(j, "eval_sequences");
  c.steps = get_size(j, "steps");
  c.batch_size = get_size(j, "batch_size");
  c.eval_interval = get_size(j, "eval_interval");
  c.warmup_steps = get_size(j, "warmup_steps");
  c.mask_ratio = get_field<double>(j, "mask_ratio");
  c.mask_rule = parse_enum(j, "mask_rule", parse_mask_rule);
  c.output_lr_variant = parse_enum(j, "output_lr_variant", parse_output_lr_variant);
  c.seed = get_field<std::uint64_t>(j, "seed");
  c.widths = get_sizes(j, "widths");
  c.coord_steps = get_size(j, "coord_steps");
  c.coord_draws = get_size(j, "coord_draws");
  c.scan_widths = get_sizes(j, "scan_widths");
  c.scan_seeds = get_size(j, "scan_seeds");
  c.equivalence_seeds = get_size(j, "equivalence_seeds");
  c.equivalence_tol = get_field<double>(j, "equivalence_tol");
  c.energy_widths = get_sizes(j, "energy_widths");
  c.energy_seeds = get_size(j, "energy_seeds");
  c.energy_steps = get_size(j, "energy_steps");
  c.sweep_widths = get_sizes(j, "sweep_widths");
  c.lr_grid = get_field<std::vector<double>>(j, "lr_grid");
  c.p = get_field<double>(j, "p");
  c.alpha = get_field<double>(j, "alpha");
  c.halfwidth = get_field<double>(j, "halfwidth");
  c.max_runs = get_size(j, "max_runs");
  c.out_dir = get_field<std::string>(j, "out_dir");
  c.threads = get_size(j, "threads");
  c.validate();
  return c;
}

void RunConfig::validate() const {
  require(width >= 1, "width", "must be >= 1");
  require(base_width >= 1 && base_rank >= 1 && base_channels >= 1 && base_topics >= 1, "base_width",
          "base geometry must be >= 1");
  require(base_rank <= base_width, "base_rank", "must be <= base_width");
  require(mfvi_iters >= 1, "mfvi_iters", "must be >= 1");
  require(seq_len >= 2, "seq_len", "must be >= 2");
  require(pos_buckets >= 2, "pos_buckets", "must be >= 2");
  try {
    hp.validate();
  } catch (const ContractError& e) {
    throw ContractError(std::string("invalid hyperparameter: ") + e.what());
  }
  require(!corpus.empty(), "corpus", "must not be empty");
  require(word_vocab >= 1, "word_vocab", "must be >= 1");
  require(eval_fraction > 0.0 && eval_fraction < 1.0, "eval_fraction", "must lie in (0, 1)");
  require(eval_sequences >= 1, "eval_sequences", "must be >= 1");
  require(steps >= 1, "steps", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(mask_ratio > 0.0 && mask_ratio < 1.0, "mask_ratio", "must lie in (0, 1)");
  check_ladder(widths, "widths");
  check_ladder(scan_widths, "scan_widths");
  check_ladder(energy_widths, "energy_widths");
  check_ladder(sweep_widths, "sweep_widths");
  require(coord_draws >= 1, "coord_draws", "must be >= 1");
  require(scan_seeds >= 1, "scan_seeds", "must be >= 1");
  require(equivalence_seeds >= 1, "equivalence_seeds", "must be >= 1");
  require(equivalence_tol > 0.0, "equivalence_tol", "must be > 0");
  require(energy_seeds >= 1, "energy_seeds", "must be >= 1");
  for (double lr : lr_grid) require(lr > 0.0, "lr_grid", "learning rates must be > 0");
  require(p > 0.0 && p < 1.0, "p", "must lie in (0, 1)");
  require(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0, 1)");
  require(halfwidth >= 0.0 && halfwidth < 1.0, "halfwidth", "must lie in [0, 1)");
  require(threads >= 1, "threads", "must be >= 1");
}

WidthScaler RunConfig::scaler(std::size_t vocab_size) const {
  PTConfig base;
  base.width = base_width;
  base.rank = base_rank;
  base.channels = base_channels;
  base.topics = base_topics;
  base.mfvi_iters = mfvi_iters;
  base.vocab_size = vocab_size;
  base.max_len = seq_len;
  base.paradigm = paradigm;
  base.pos_bias = pos_bias;
  base.pos_buckets = pos_buckets;
  return WidthScaler(base, paradigm);
}

PTConfig RunConfig::model_config(std::size_t vocab_size) const {
  PTConfig c;
  if (rank && channels && topics) {
    // fully explicit geometry: no width scaling involved
    c = scaler(vocab_size).base();
    c.width = width;
  } else {
    c = scaler(vocab_size).scale(width);
  }
  if (rank) c.rank = *rank;
  if (channels) c.channels = *channels;
  if (topics) c.topics = *topics;
  c.validate();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ContractError("malformed config " + path + " (" + e.what() + ")");
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ContractError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  j[key] = value;
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("out_dir");
  j.erase("threads");
  const std::string text = j.dump();  // keys are sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mupt
