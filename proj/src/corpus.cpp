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

#include "v2s/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "v2s/errors.hpp"

namespace v2s {

namespace {

bool is_word_byte(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) != 0;
}

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

}  // namespace

std::string TokenSequence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text, bool lowercase) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      flush();
    } else if (is_word_byte(c)) {
      current += lowercase && c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    } else if (c == '\'' && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      // clitic: "'m", "'s", "don't" -> "don" "'t"
      flush();
      current += '\'';
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

Tokenizer default_tokenizer(bool lowercase) {
  return [lowercase](std::string_view text) { return tokenize_words(text, lowercase); };
}

TokenSequence tokenize(std::string_view text, bool lowercase) {
  return TokenSequence{tokenize_words(text, lowercase), {}};
}

TokenSequence tokenize(std::string_view text, const Tokenizer& tokenizer) {
  return TokenSequence{tokenizer(text), {}};
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= bytes.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

std::vector<RawSentence> load_sentences(const std::string& path, std::size_t max_len,
                                        const Tokenizer& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<RawSentence> out;
  std::string line;
  for (std::size_t index = 0; std::getline(in, line); ++index) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line)) {
      throw EncodingError(path + ": line " + std::to_string(index + 1) + " is not valid UTF-8");
    }
    const auto n = tokenizer(line).size();
    if (n == 0 || n > max_len) continue;
    out.push_back(RawSentence{line, index});
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& Vocabulary::special_tokens() {
  static const std::vector<std::string> specials = {"<pad>", "<s>", "</s>", "<unk>"};
  return specials;
}

bool Vocabulary::is_special(std::string_view token) {
  const auto& s = special_tokens();
  return std::find(s.begin(), s.end(), token) != s.end();
}

Vocabulary::Vocabulary() : Vocabulary(special_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
  const auto& specials = special_tokens();
  if (id_to_token_.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), id_to_token_.begin())) {
    throw FormatError("vocabulary must start with the specials <pad> <s> </s> <unk>");
  }
  token_to_id_.reserve(id_to_token_.size());
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    if (id_to_token_[i].empty()) throw FormatError("empty token at vocabulary id " + std::to_string(i));
    if (!token_to_id_.emplace(id_to_token_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate vocabulary token: " + id_to_token_[i]);
    }
  }
}

int Vocabulary::id(std::string_view token) const {
  const auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw LookupError("vocabulary id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

TokenSequence Vocabulary::apply(TokenSequence seq) const {
  seq.ids.resize(seq.tokens.size());
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (is_special(seq.tokens[i])) {
      throw DomainError("special token inside a sentence: " + seq.tokens[i]);
    }
    seq.ids[i] = id(seq.tokens[i]);
  }
  return seq;
}

TokenSequence Vocabulary::from_ids(std::span<const int> ids) const {
  TokenSequence seq;
  seq.ids.assign(ids.begin(), ids.end());
  seq.tokens.reserve(ids.size());
  for (int id : ids) seq.tokens.push_back(token(id));
  return seq;
}

std::string Vocabulary::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : id_to_token_) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (const auto& t : id_to_token_) out << t << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line)) {
      throw EncodingError(path + ": line " + std::to_string(tokens.size() + 1) + " is not valid UTF-8");
    }
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocabulary(std::span<const TokenSequence> corpus, std::size_t min_freq,
                            std::size_t max_size) {
  if (corpus.empty()) throw DomainError("cannot build a vocabulary from an empty corpus");
  if (max_size < 5) throw ConfigError("vocabulary max_size must be at least 5");
  if (min_freq < 1) throw ConfigError("vocabulary min_freq must be positive");

  std::map<std::string, std::size_t> counts;
  for (const auto& seq : corpus) {
    for (const auto& t : seq.tokens) {
      if (!Vocabulary::is_special(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, n] : counts) {
    if (n >= min_freq) ranked.emplace_back(token, n);
  }
  // map iteration is lexicographic, so a stable sort keeps that as tie-break
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  auto tokens = Vocabulary::special_tokens();
  for (const auto& [token, n] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens));
}

}  // namespace v2s
