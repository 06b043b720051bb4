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

#include <algorithm>
#include <random>

#include "temp_dir.hpp"
#include "v2s/encoders.hpp"
#include "v2s/errors.hpp"

using Eigen::VectorXd;
using v2s::TokenEmbeddingTable;
using v2s::TokenSequence;

namespace {

TokenSequence seq(std::vector<std::string> tokens) { return TokenSequence{std::move(tokens), {}}; }

TokenEmbeddingTable table_2d() {
  TokenEmbeddingTable t(2);
  t.add("a", VectorXd{{1.0, 0.0}});
  t.add("b", VectorXd{{0.0, 2.0}});
  t.add("c", VectorXd{{3.0, 1.0}});
  t.add("d", VectorXd{{-1.0, 4.0}});
  t.add("x", VectorXd{{1.0, 0.0}});
  t.add("y", VectorXd{{0.0, 1.0}});
  return t;
}

bool bitwise_equal(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace

TEST_CASE("encode_avg") {
  const auto t = table_2d();
  CHECK(bitwise_equal(v2s::encode_avg(seq({"a"}), t).values, t.lookup("a")));
  CHECK(v2s::encode_avg(seq({"x", "y"}), t).values.isApprox(VectorXd{{0.5, 0.5}}));
  CHECK(v2s::encode_avg(seq({"zzz"}), t).values.isZero());  // UNK defaults to zeros
  CHECK_THROWS_AS(v2s::encode_avg(seq({}), t), v2s::DomainError);
}

TEST_CASE("encode_max") {
  const auto t = table_2d();
  CHECK(v2s::encode_max(seq({"x", "y"}), t).values == VectorXd{{1.0, 1.0}});
  CHECK(v2s::encode_max(seq({"d"}), t).values == t.lookup("d"));
  CHECK_THROWS_AS(v2s::encode_max(seq({}), t), v2s::DomainError);
}

TEST_CASE("encode_hier windows") {
  const auto t = table_2d();
  // single window and short-sentence fallback both equal the mean
  CHECK(v2s::encode_hier(seq({"a", "b", "c"}), t, 3).values.isApprox(v2s::encode_avg(seq({"a", "b", "c"}), t).values));
  CHECK(v2s::encode_hier(seq({"a", "b"}), t, 3).values.isApprox(v2s::encode_avg(seq({"a", "b"}), t).values));
  // windows (a,b,c) -> (4/3, 1) and (b,c,d) -> (2/3, 7/3); elementwise max, worked by hand
  const VectorXd expected{{4.0 / 3.0, 7.0 / 3.0}};
  CHECK(v2s::encode_hier(seq({"a", "b", "c", "d"}), t, 3).values.isApprox(expected, 1e-15));
  CHECK(v2s::encode_hier(seq({"a", "b"}), t, 1).values == v2s::encode_max(seq({"a", "b"}), t).values);
  CHECK_THROWS_AS(v2s::encode_hier(seq({"a"}), t, 0), v2s::ConfigError);
  CHECK_THROWS_AS(v2s::encode_hier(seq({}), t, 3), v2s::DomainError);
}

TEST_CASE("encode_concat layout") {
  const auto t = table_2d();
  const auto u = v2s::encode_avg(seq({"a", "b"}), t);
  const auto v = v2s::encode_max(seq({"a", "b"}), t);
  const std::vector<v2s::SentenceEmbedding> parts = {u, v};
  const auto c = v2s::encode_concat(parts);
  CHECK(c.dim() == 4);
  CHECK(c.values.head(2) == u.values);
  CHECK(c.values.tail(2) == v.values);
  CHECK(v2s::encode_concat(std::vector{u}).values == u.values);

  auto w = v;
  w.source_line = 5;
  CHECK_THROWS_AS(v2s::encode_concat(std::vector{u, w}), v2s::DomainError);
  CHECK_THROWS_AS(v2s::encode_concat(std::vector<v2s::SentenceEmbedding>{}), v2s::DomainError);
}

TEST_CASE("concat of three 300-d parts is 900-d") {
  std::vector<std::string> words = {"the", "cat", "sat"};
  auto table = std::make_shared<const TokenEmbeddingTable>(TokenEmbeddingTable::random(words, 300, 1));
  v2s::Encoder enc(v2s::parse_encoder_spec("concat", 300), table);
  CHECK(enc.dim() == 900);
  CHECK(enc.encode(seq(words)).dim() == 900);
}

TEST_CASE("order invariance of avg and max, order sensitivity of hier") {
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  const auto t = TokenEmbeddingTable::random(vocab, 16, 9);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) tokens.push_back(vocab[rng() % vocab.size()]);
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(bitwise_equal(v2s::encode_avg(seq(tokens), t).values, v2s::encode_avg(seq(shuffled), t).values));
    CHECK(bitwise_equal(v2s::encode_max(seq(tokens), t).values, v2s::encode_max(seq(shuffled), t).values));
  }
  for (int n = 2; n <= 4; ++n) {
    // n + 1 distinct tokens: some permutation changes the result
    std::vector<std::string> tokens(vocab.begin(), vocab.begin() + n + 1);
    const auto base = v2s::encode_hier(seq(tokens), t, n).values;
    bool found = false;
    auto perm = tokens;
    std::sort(perm.begin(), perm.end());
    do {
      found = found || !bitwise_equal(v2s::encode_hier(seq(perm), t, n).values, base);
    } while (!found && std::next_permutation(perm.begin(), perm.end()));
    CHECK(found);
  }
}

TEST_CASE("encoders are deterministic and match their declared dimension") {
  std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  auto table = std::make_shared<const TokenEmbeddingTable>(TokenEmbeddingTable::random(words, 8, 2));
  for (const std::string spec : {"avg", "max", "hier", "hier:2", "concat", "concat:avg+max"}) {
    v2s::Encoder enc(v2s::parse_encoder_spec(spec, 8), table);
    const auto e1 = enc.encode(seq({"a", "c", "e", "b"}));
    const auto e2 = enc.encode(seq({"a", "c", "e", "b"}));
    CHECK(e1.dim() == enc.dim());
    CHECK(bitwise_equal(e1.values, e2.values));
    CHECK(e1.values.allFinite());
    CHECK(e1.encoder_id == spec);
  }
  CHECK_THROWS_AS(v2s::parse_encoder_spec("bogus", 8), v2s::ConfigError);
  CHECK_THROWS_AS(v2s::parse_encoder_spec("hier:0", 8), v2s::ConfigError);
  CHECK_THROWS_AS(v2s::parse_encoder_spec("concat:avg+precomputed", 8), v2s::ConfigError);
}

TEST_CASE("token embedding table file and UNK handling") {
  v2s::testing::TempDir dir;
  const auto path = dir.write("emb.txt", "3 2\nhello 1 2\nworld 0.5 -1\n<unk> 9 9\n");
  const auto t = TokenEmbeddingTable::load_text(path);
  CHECK(t.dim() == 2);
  CHECK(t.lookup("world") == VectorXd{{0.5, -1.0}});
  CHECK(t.lookup("missing") == VectorXd{{9.0, 9.0}});
  t.save_text(dir.file("out.txt"));
  const auto back = TokenEmbeddingTable::load_text(dir.file("out.txt"));
  CHECK(back.lookup("hello") == t.lookup("hello"));
  CHECK(back.unk() == t.unk());

  dir.write("ragged.txt", "a 1 2\nb 1\n");
  CHECK_THROWS_AS(TokenEmbeddingTable::load_text(dir.file("ragged.txt")), v2s::DimensionError);
  dir.write("nan.txt", "a 1 nan\n");
  CHECK_THROWS(TokenEmbeddingTable::load_text(dir.file("nan.txt")));
}

TEST_CASE("precomputed embeddings, text format") {
  v2s::testing::TempDir dir;
  const auto path = dir.write("vecs.txt", "1 2 3 4\n5 6 7 8\n9 10 11 12\n");
  v2s::EncoderSpec spec{"laser", v2s::EncoderKind::kPrecomputed, 4, 3, {}, path};
  const auto e = v2s::lookup_precomputed(spec, 1);
  CHECK(e.values == VectorXd{{5, 6, 7, 8}});
  CHECK(e.encoder_id == "laser");
  CHECK_THROWS_AS(v2s::lookup_precomputed(spec, 3), v2s::LookupError);

  v2s::Encoder enc(spec);
  CHECK(enc.encode(TokenSequence{}, 2).values == VectorXd{{9, 10, 11, 12}});
  CHECK_THROWS_AS(enc.encode(TokenSequence{}), v2s::LookupError);

  spec.dim = 5;
  CHECK_THROWS_AS(v2s::Encoder{spec}, v2s::FormatError);
  dir.write("ragged.txt", "1 2\n3\n");
  CHECK_THROWS_AS(v2s::PrecomputedEmbeddings::load(dir.file("ragged.txt")), v2s::FormatError);
}

TEST_CASE("precomputed embeddings at LASER width, binary format") {
  v2s::testing::TempDir dir;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Random(3, 1024);
  rows = rows.cast<float>().cast<double>();  // binary storage is f32
  v2s::PrecomputedEmbeddings(rows).save_binary(dir.file("laser.bin"));

  const auto bytes = v2s::testing::read_file(dir.file("laser.bin"));
  CHECK(bytes.substr(0, 8) == "V2SEMB01");
  CHECK(bytes.size() == 8 + 8 + 4 + 3 * 1024 * 4);

  const auto loaded = v2s::PrecomputedEmbeddings::load(dir.file("laser.bin"), 1024);
  CHECK(loaded.size() == 3);
  CHECK(loaded.dim() == 1024);
  CHECK(loaded.row(2) == rows.row(2).transpose());
  CHECK_THROWS_AS(v2s::PrecomputedEmbeddings::load(dir.file("laser.bin"), 300), v2s::FormatError);

  v2s::PrecomputedEmbeddings(rows).save_text(dir.file("laser.txt"));
  CHECK(v2s::PrecomputedEmbeddings::load(dir.file("laser.txt"), 1024).row(0) == rows.row(0).transpose());
}
