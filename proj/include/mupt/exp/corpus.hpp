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
#include <string>
#include <string_view>
#include <vector>

namespace mupt {

enum class TokenizerKind { Byte, Word };

std::string_view to_string(TokenizerKind k);
TokenizerKind parse_tokenizer(std::string_view s);

// Special ids follow the regular ids: MASK, PAD, UNK.
struct SpecialIds {
  int mask = 256;
  int pad = 257;
  int unk = 258;
};

/// Encoded text plus the tokenizer needed to decode it.
struct Corpus {
  TokenizerKind tokenizer = TokenizerKind::Byte;
  std::size_t regular_vocab = 256;  // ids [0, regular_vocab) are text tokens
  SpecialIds specials;
  std::vector<std::string> words;  // word tokenizer only, id -> word
  std::vector<int> ids;

  std::size_t vocab_size() const { return regular_vocab + 3; }
};

Corpus encode_bytes(std::string_view text);
// Whitespace-split words; the `max_words` most frequent (ties by first use) get ids,
// the rest map to UNK. Decoding joins words with single spaces.
Corpus encode_words(std::string_view text, std::size_t max_words);
Corpus encode_corpus(std::string_view text, TokenizerKind tokenizer, std::size_t max_words = 4096);
std::string decode(const Corpus& corpus, const std::vector<int>& ids);

/// Splits ids into chunks of exactly `length` tokens, padding the last one.
std::vector<std::vector<int>> chunk_ids(const std::vector<int>& ids, std::size_t length, int pad);

/// Deterministic English-like text of exactly `bytes` bytes.
std::string synthetic_text(std::size_t bytes, std::uint64_t seed);

/// Reads a corpus source: "synthetic:<bytes>" or a file path.
std::string read_corpus_source(const std::string& source);

struct DataSplit {
  std::vector<std::vector<int>> train;
  std::vector<std::vector<int>> eval;
};

/// The last ceil(eval_fraction * chunks) chunks are held out (at least one of each split).
DataSplit split_chunks(std::vector<std::vector<int>> chunks, double eval_fraction);

}  // namespace mupt
