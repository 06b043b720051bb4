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

#ifndef V2S_CORPUS_HPP
#define V2S_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace v2s {

/// One line of a corpus file. `line_index` is the zero-based line number in
/// the original file and survives filtering, so precomputed embedding files
/// can be joined back on it.
struct RawSentence {
  std::string text;
  std::size_t line_index = 0;
};

/// A tokenized sentence. `ids` is empty until a vocabulary is applied;
/// afterwards it has the same length as `tokens`.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<int> ids;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool has_ids() const { return !tokens.empty() && ids.size() == tokens.size(); }

  /// Tokens joined by single spaces.
  std::string text() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Splits a string into surface tokens. Must be deterministic.
using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Whitespace tokenization with ASCII punctuation detached into separate
/// tokens. An apostrophe followed by a letter or digit starts a clitic token
/// ("'m", "'t"). Bytes outside ASCII are treated as word characters.
std::vector<std::string> tokenize_words(std::string_view text, bool lowercase = true);

/// Returns the default tokenizer, `tokenize_words` bound to `lowercase`.
Tokenizer default_tokenizer(bool lowercase = true);

/// Tokenizes `text` into a sequence without ids.
TokenSequence tokenize(std::string_view text, bool lowercase = true);
TokenSequence tokenize(std::string_view text, const Tokenizer& tokenizer);

/// True if `bytes` is well-formed UTF-8.
bool is_valid_utf8(std::string_view bytes);

/// Reads a one-sentence-per-line file and keeps the sentences whose
/// tokenized length is in [1, max_len]. Throws IoError if the file cannot be
/// opened and EncodingError (naming the line) on malformed UTF-8.
std::vector<RawSentence> load_sentences(const std::string& path, std::size_t max_len,
                                        const Tokenizer& tokenizer = default_tokenizer());

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecials = 4;

  /// Vocabulary holding only the four specials.
  Vocabulary();

  /// Builds from an id-ordered token list whose first four entries are the
  /// specials. Throws FormatError otherwise or on duplicate tokens.
  explicit Vocabulary(std::vector<std::string> id_to_token);

  static const std::vector<std::string>& special_tokens();
  static bool is_special(std::string_view token);

  std::size_t size() const { return id_to_token_.size(); }
  /// Id of `token`, or kUnk when absent.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  /// Fills `ids` for a sequence; out-of-vocabulary tokens map to kUnk while
  /// keeping their surface form.
  TokenSequence apply(TokenSequence seq) const;
  /// Surface tokens for a list of ids.
  TokenSequence from_ids(std::span<const int> ids) const;

  /// FNV-1a 64 digest over the token list, as 16 lowercase hex digits.
  std::string digest() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

/// Specials plus the most frequent corpus tokens (frequency descending, ties
/// broken lexicographically), dropping tokens seen fewer than `min_freq`
/// times. The result has at most `max_size` entries including specials.
Vocabulary build_vocabulary(std::span<const TokenSequence> corpus, std::size_t min_freq,
                            std::size_t max_size);

}  // namespace v2s

#endif  // V2S_CORPUS_HPP
