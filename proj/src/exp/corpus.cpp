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


#include "mupt/exp/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mupt/core/error.hpp"
#include "mupt/core/rng.hpp"

namespace mupt {

std::string_view to_string(TokenizerKind k) { return k == TokenizerKind::Byte ? "byte" : "word"; }

TokenizerKind parse_tokenizer(std::string_view s) {
  if (s == "byte") return TokenizerKind::Byte;
  if (s == "word") return TokenizerKind::Word;
  throw ContractError("unknown tokenizer: " + std::string(s));
}

Corpus encode_bytes(std::string_view text) {
  if (text.empty()) throw ContractError("encode_corpus: empty source");
  Corpus c;
  c.ids.reserve(text.size());
  for (unsigned char ch : text) c.ids.push_back(ch);
  return c;
}

namespace {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

Corpus encode_words(std::string_view text, std::size_t max_words) {
  if (max_words < 1) throw ContractError("encode_words: max_words must be >= 1");
  const auto words = split_words(text);
  if (words.empty()) throw ContractError("encode_corpus: empty source");
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, first use
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto [it, fresh] = stats.try_emplace(words[i], 0, i);
    ++it->second.first;
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> order(stats.begin(), stats.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  if (order.size() > max_words) order.resize(max_words);
  Corpus c;
  c.tokenizer = TokenizerKind::Word;
  c.regular_vocab = order.size();
  const int base = static_cast<int>(order.size());
  c.specials = SpecialIds{base, base + 1, base + 2};
  std::unordered_map<std::string, int> index;
  for (const auto& [w, st] : order) {
    index.emplace(w, static_cast<int>(c.words.size()));
    c.words.push_back(w);
  }
  c.ids.reserve(words.size());
  for (const auto& w : words) {
    auto it = index.find(w);
    c.ids.push_back(it == index.end() ? c.specials.unk : it->second);
  }
  return c;
}

Corpus encode_corpus(std::string_view text, TokenizerKind tokenizer, std::size_t max_words) {
  return tokenizer == TokenizerKind::Byte ? encode_bytes(text) : encode_words(text, max_words);
}

std::string decode(const Corpus& corpus, const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= corpus.vocab_size()) {
      throw ContractError("decode: id " + std::to_string(id) + " outside vocabulary");
    }
    if (corpus.tokenizer == TokenizerKind::Byte) {
      if (id >= 256) throw ContractError("decode: special id " + std::to_string(id) + " has no byte");
      out.push_back(static_cast<char>(id));
      continue;
    }
    if (i > 0) out.push_back(' ');
    if (id == corpus.specials.unk) out += "<unk>";
    else if (id == corpus.specials.mask) out += "<mask>";
    else if (id == corpus.specials.pad) out += "<pad>";
    else out += corpus.words[static_cast<std::size_t>(id)];
  }
  return out;
}

std::vector<std::vector<int>> chunk_ids(const std::vector<int>& ids, std::size_t length, int pad) {
  if (length < 1) throw ContractError("chunk_ids: length must be >= 1");
  std::vector<std::vector<int>> out;
  for (std::size_t start = 0; start < ids.size(); start += length) {
    const std::size_t end = std::min(ids.size(), start + length);
    std::vector<int> chunk(ids.begin() + static_cast<long>(start), ids.begin() + static_cast<long>(end));
    chunk.resize(length, pad);
    out.push_back(std::move(chunk));
  }
  return out;
}

namespace {

constexpr const char* kLexicon[] = {
    "the",    "of",     "and",    "to",     "in",     "a",      "is",     "that",   "for",    "it",
    "as",     "was",    "with",   "be",     "by",     "on",     "not",    "he",     "this",   "are",
    "or",     "his",    "from",   "at",     "which",  "but",    "have",   "an",     "had",    "they",
    "you",    "were",   "their",  "one",    "all",    "we",     "can",    "her",    "has",    "there",
    "been",   "if",     "more",   "when",   "will",   "would",  "who",    "so",     "no",     "she",
    "other",  "its",    "may",    "these",  "about",  "them",   "than",   "into",   "time",   "only",
    "could",  "new",    "some",   "while",   "first",  "also",   "after",  "people", "work",   "water",
    "model",  "system", "number", "small",  "large",  "world",  "house",  "light",  "river",  "city",
    "old",    "long",   "early",  "music",  "school", "paper",  "family", "market", "energy", "form",
    "change", "power",  "field",  "order",  "group",  "value",  "study",  "line",   "place",  "point",
    "state",  "width",  "year",   "under",  "between", "during", "because", "through", "against", "before",
};
constexpr std::size_t kLexiconSize = sizeof(kLexicon) / sizeof(kLexicon[0]);

std::size_t zipf_pick(SeededRng& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform();
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace

std::string synthetic_text(std::size_t bytes, std::uint64_t seed) {
  if (bytes == 0) throw ContractError("synthetic_text: bytes must be >= 1");
  SeededRng rng(mix_seed(seed, 0x5e17));
  std::vector<double> cdf(kLexiconSize);
  double total = 0.0;
  for (std::size_t i = 0; i < kLexiconSize; ++i) total += 1.0 / static_cast<double>(i + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < kLexiconSize; ++i) {
    acc += 1.0 / static_cast<double>(i + 1) / total;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  // Each word prefers a few successors, which gives the text some bigram structure.
  std::vector<std::array<std::size_t, 3>> follow(kLexiconSize);
  for (auto& f : follow) {
    for (auto& w : f) w = zipf_pick(rng, cdf);
  }

  std::string out;
  out.reserve(bytes + 64);
  std::size_t prev = zipf_pick(rng, cdf);
  while (out.size() < bytes) {
    const std::size_t len = 4 + rng.below(10);
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t w = rng.uniform() < 0.6 ? follow[prev][rng.below(3)] : zipf_pick(rng, cdf);
      std::string word = kLexicon[w];
      if (k == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      out += word;
      out += k + 1 == len ? (rng.uniform() < 0.1 ? ".\n" : ". ") : (rng.uniform() < 0.05 ? ", " : " ");
      prev = w;
    }
  }
  out.resize(bytes);
  return out;
}

std::string read_corpus_source(const std::string& source) {
  constexpr std::string_view prefix = "synthetic:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string count = source.substr(prefix.size());
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
      n = std::stoull(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != count.size() || n == 0) throw ContractError("bad synthetic corpus size: " + source);
    return synthetic_text(static_cast<std::size_t>(n), 0);
  }
  std::ifstream in(source, std::ios::binary);
  if (!in) throw ContractError("cannot open corpus: " + source);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (text.empty()) throw ContractError("encode_corpus: empty source " + source);
  return text;
}

DataSplit split_chunks(std::vector<std::vector<int>> chunks, double eval_fraction) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw ContractError("eval_fraction must lie in (0, 1)");
  }
  if (chunks.size() < 2) throw ContractError("corpus too small: need at least two chunks for train/eval");
  auto n_eval = static_cast<std::size_t>(std::ceil(eval_fraction * static_cast<double>(chunks.size())));
  n_eval = std::clamp<std::size_t>(n_eval, 1, chunks.size() - 1);
  DataSplit s;
  const auto cut = chunks.begin() + static_cast<long>(chunks.size() - n_eval);
  s.train.assign(std::make_move_iterator(chunks.begin()), std::make_move_iterator(cut));
  s.eval.assign(std::make_move_iterator(cut), std::make_move_iterator(chunks.end()));
  return s;
}

}  // namespace mupt
