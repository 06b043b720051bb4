// Copyright 2026 The vec2sent Authors.
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

#ifndef V2S_DIAGNOSTICS_HPP
#define V2S_DIAGNOSTICS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "v2s/corpus.hpp"
#include "v2s/decoder.hpp"
#include "v2s/encoders.hpp"

namespace v2s {

/// An input sentence and its reconstruction, tokenized the same way.
struct SentencePair {
  TokenSequence x;
  TokenSequence y;
};

struct Rates {
  double id_rate = 0.0;
  double perm_rate = 0.0;
  std::optional<double> id_over_perm;  // absent when perm_rate == 0
};

struct DiagnosticReport {
  std::string encoder_id;
  std::size_t n_pairs = 0;
  double id_rate = 0.0;    // fractions in [0, 1]
  double perm_rate = 0.0;
  std::optional<double> id_over_perm;
  double bleu = 0.0;       // in [0, 100]
  std::optional<double> mover;
  std::size_t mover_skipped = 0;  // pairs the external scorer failed on
};

/// Exact token-sequence equality.
bool is_id(const TokenSequence& x, const TokenSequence& y);
/// Multiset equality of tokens, duplicates counted.
bool is_perm(const TokenSequence& x, const TokenSequence& y);

/// Throws DomainError on an empty pair list.
Rates rates(std::span<const SentencePair> pairs);

/// Sentence-level BLEU-4 of hypothesis `y` against the single reference
/// `x`, in [0, 100]. Unigram precision is unsmoothed; orders n >= 2 use
/// add-one smoothing; orders for which `y` has no n-grams are left out of
/// the geometric mean. Standard brevity penalty.
double bleu(const TokenSequence& x, const TokenSequence& y);
double avg_bleu(std::span<const SentencePair> pairs);

/// External soft similarity scorer (e.g. MoverScore) over detokenized text.
/// May throw; failing pairs are skipped.
using PairScorer = std::function<double(const std::string& x_text, const std::string& y_text)>;

struct MoverResult {
  std::optional<double> score;  // absent when no scorer is configured
  std::size_t skipped = 0;
};

MoverResult mover_adapter(const PairScorer& scorer, std::span<const SentencePair> pairs);

/// Aggregates every metric over already generated pairs.
DiagnosticReport assemble_report(const std::string& encoder_id, std::span<const SentencePair> pairs,
                                 const PairScorer& scorer = {});

/// Encodes each evaluation sentence, decodes it greedily and scores the
/// reconstructions. `line_indices` is required for precomputed encoders.
/// Generated pairs are appended to `pairs_out` when non-null.
DiagnosticReport diagnose(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab, const Encoder& encoder,
                          std::span<const TokenSequence> eval, std::span<const std::size_t> line_indices = {},
                          const PairScorer& scorer = {}, std::vector<SentencePair>* pairs_out = nullptr);

/// JSON view with rates as percentages rounded to two decimals.
nlohmann::json to_json(const DiagnosticReport& report);

/// Pairs file: JSON lines {"input": ..., "output": ...}.
std::vector<SentencePair> read_pairs_jsonl(const std::string& path, const Tokenizer& tokenizer);
void write_pairs_jsonl(const std::string& path, std::span<const SentencePair> pairs);

}  // namespace v2s

#endif  // V2S_DIAGNOSTICS_HPP
