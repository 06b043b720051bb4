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

#include <doctest.h>

#include <random>

#include "temp_dir.hpp"
#include "v2s/corpus.hpp"
#include "v2s/errors.hpp"

using v2s::TokenSequence;
using v2s::Vocabulary;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(v2s::tokenize("I like cats").tokens == Tokens{"i", "like", "cats"});
  CHECK(v2s::tokenize("I like cats", false).tokens == Tokens{"I", "like", "cats"});
  CHECK(v2s::tokenize("").empty());
  CHECK(v2s::tokenize("  \t ").empty());
}

TEST_CASE("tokenize keeps pre-separated clitics and detaches punctuation") {
  CHECK(v2s::tokenize("i 'm not sure .").tokens == Tokens{"i", "'m", "not", "sure", "."});
  CHECK(v2s::tokenize("\" the point is , \" stoller adds").tokens ==
        Tokens{"\"", "the", "point", "is", ",", "\"", "stoller", "adds"});
  CHECK(v2s::tokenize("I don't know.").tokens == Tokens{"i", "don", "'t", "know", "."});
  CHECK(v2s::tokenize("rock 'n' roll").tokens == Tokens{"rock", "'n", "'", "roll"});
  // non-ASCII bytes stay inside words
  CHECK(v2s::tokenize("Café au lait").tokens == Tokens{"café", "au", "lait"});
}

TEST_CASE("tokenize is deterministic") {
  std::mt19937 rng(3);
  const std::string alphabet = "abc XYZ.,'!  \t";
  for (int i = 0; i < 200; ++i) {
    std::string s;
    for (int k = 0; k < 30; ++k) s += alphabet[rng() % alphabet.size()];
    CHECK(v2s::tokenize(s) == v2s::tokenize(s));
  }
}

TEST_CASE("load_sentences filters by length and keeps original line numbers") {
  v2s::testing::TempDir dir;
  std::string long_line;
  for (int i = 0; i < 16; ++i) long_line += "w" + std::to_string(i) + " ";
  const auto path = dir.write("c.txt", "a b\nc\n" + long_line + "\n");
  const auto kept = v2s::load_sentences(path, 15);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].line_index == 0);
  CHECK(kept[0].text == "a b");
  CHECK(kept[1].line_index == 1);

  const auto with_long = v2s::load_sentences(path, 16);
  CHECK(with_long.size() == 3);
  CHECK(with_long[2].line_index == 2);
}

TEST_CASE("load_sentences keeps line numbers after a filtered line") {
  v2s::testing::TempDir dir;
  const auto path = dir.write("c.txt", "one two three\nx\n\r\ny z\n");
  const auto kept = v2s::load_sentences(path, 2);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].line_index == 1);
  CHECK(kept[1].line_index == 3);
  CHECK(kept[1].text == "y z");
}

TEST_CASE("load_sentences edge cases and errors") {
  v2s::testing::TempDir dir;
  CHECK(v2s::load_sentences(dir.write("empty.txt", ""), 15).empty());
  CHECK_THROWS_AS(v2s::load_sentences(dir.file("missing.txt"), 15), v2s::IoError);
  const auto bad = dir.write("bad.txt", "fine\nbroken \xC3\x28 here\n");
  try {
    v2s::load_sentences(bad, 15);
    FAIL("expected an encoding error");
  } catch (const v2s::EncodingError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("filtering is monotone in max_len") {
  v2s::testing::TempDir dir;
  std::mt19937 rng(11);
  std::string text;
  for (int i = 0; i < 100; ++i) {
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) text += "w ";
    text += "\n";
  }
  const auto path = dir.write("c.txt", text);
  for (std::size_t k = 1; k < 12; ++k) {
    const auto small = v2s::load_sentences(path, k);
    const auto large = v2s::load_sentences(path, k + 1);
    std::size_t j = 0;
    for (const auto& s : small) {
      while (j < large.size() && large[j].line_index != s.line_index) ++j;
      CHECK(j < large.size());
    }
  }
}

TEST_CASE("utf8 validation") {
  CHECK(v2s::is_valid_utf8("plain"));
  CHECK(v2s::is_valid_utf8("\xE2\x82\xAC"));       // euro sign
  CHECK(v2s::is_valid_utf8("\xF0\x9F\x98\x80"));   // emoji
  CHECK_FALSE(v2s::is_valid_utf8("\xC0\xAF"));     // overlong
  CHECK_FALSE(v2s::is_valid_utf8("\xED\xA0\x80")); // surrogate
  CHECK_FALSE(v2s::is_valid_utf8("\xE2\x82"));     // truncated
  CHECK_FALSE(v2s::is_valid_utf8("\xFF"));
}

TEST_CASE("build_vocabulary orders by frequency then lexicographically") {
  const std::vector<TokenSequence> corpus = {v2s::tokenize("a b"), v2s::tokenize("a")};
  const auto v = v2s::build_vocabulary(corpus, 1, 10);
  CHECK(v.size() == 6);
  CHECK(v.token(4) == "a");
  CHECK(v.token(5) == "b");

  const auto frequent = v2s::build_vocabulary(corpus, 2, 10);
  CHECK(frequent.size() == 5);
  CHECK(frequent.contains("a"));
  CHECK_FALSE(frequent.contains("b"));

  const std::vector<TokenSequence> tie = {v2s::tokenize("y x")};
  const auto t = v2s::build_vocabulary(tie, 1, 10);
  CHECK(t.id("x") < t.id("y"));
}

TEST_CASE("build_vocabulary truncation and configuration errors") {
  const std::vector<TokenSequence> corpus = {v2s::tokenize("a a a b b c")};
  const auto v = v2s::build_vocabulary(corpus, 1, 5);
  CHECK(v.size() == 5);
  CHECK(v.token(4) == "a");
  CHECK_THROWS_AS(v2s::build_vocabulary(corpus, 1, 4), v2s::ConfigError);
  CHECK_THROWS_AS(v2s::build_vocabulary(std::vector<TokenSequence>{}, 1, 10), v2s::DomainError);
}

TEST_CASE("vocabulary specials, OOV and round trip") {
  const std::vector<TokenSequence> corpus = {v2s::tokenize("the cat sat on the mat .")};
  const auto v = v2s::build_vocabulary(corpus, 1, 100);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kSos) == "<s>");
  CHECK(v.token(Vocabulary::kEos) == "</s>");
  CHECK(v.token(Vocabulary::kUnk) == "<unk>");
  for (std::size_t id = 0; id < v.size(); ++id) CHECK(v.id(v.token(static_cast<int>(id))) == static_cast<int>(id));

  const auto seq = v.apply(v2s::tokenize("the dog sat"));
  REQUIRE(seq.has_ids());
  CHECK(seq.tokens[1] == "dog");  // surface form kept
  CHECK(seq.ids[1] == Vocabulary::kUnk);
  for (int id : seq.ids) CHECK((id >= 0 && id < static_cast<int>(v.size())));

  CHECK_THROWS_AS(v.apply(TokenSequence{{"a", "</s>"}, {}}), v2s::DomainError);
  CHECK_THROWS_AS(v.token(1000), v2s::LookupError);
}

TEST_CASE("vocabulary file round trip and digest") {
  v2s::testing::TempDir dir;
  const std::vector<TokenSequence> corpus = {v2s::tokenize("b a c a")};
  const auto v = v2s::build_vocabulary(corpus, 1, 100);
  v.save(dir.file("vocab.txt"));
  CHECK(v2s::testing::read_file(dir.file("vocab.txt")) == "<pad>\n<s>\n</s>\n<unk>\na\nb\nc\n");
  const auto loaded = Vocabulary::load(dir.file("vocab.txt"));
  CHECK(loaded.tokens() == v.tokens());
  CHECK(loaded.digest() == v.digest());
  CHECK(v.digest().size() == 16);

  const auto other = v2s::build_vocabulary(std::vector<TokenSequence>{v2s::tokenize("b a d a")}, 1, 100);
  CHECK(other.digest() != v.digest());

  dir.write("bad.txt", "<s>\n<pad>\n</s>\n<unk>\n");
  CHECK_THROWS_AS(Vocabulary::load(dir.file("bad.txt")), v2s::FormatError);
  dir.write("dup.txt", "<pad>\n<s>\n</s>\n<unk>\na\na\n");
  CHECK_THROWS_AS(Vocabulary::load(dir.file("dup.txt")), v2s::FormatError);
}
