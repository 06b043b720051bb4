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

#ifndef V2S_ENCODERS_HPP
#define V2S_ENCODERS_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "v2s/corpus.hpp"

namespace v2s {

/// A fixed-size real vector produced by a sentence encoder.
struct SentenceEmbedding {
  Eigen::VectorXd values;
  std::string encoder_id;
  std::optional<std::size_t> source_line;

  Eigen::Index dim() const { return values.size(); }
};

/// Token vectors for the non-parametric encoders. Lookups of unknown tokens
/// return the UNK vector (the table's "<unk>" entry when present, zeros
/// otherwise).
class TokenEmbeddingTable {
 public:
  explicit TokenEmbeddingTable(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  void add(const std::string& token, const Eigen::VectorXd& vector);
  void set_unk(const Eigen::VectorXd& vector);
  bool contains(const std::string& token) const { return vectors_.contains(token); }
  const Eigen::VectorXd& lookup(const std::string& token) const;
  const Eigen::VectorXd& unk() const { return unk_; }

  /// Reads the word2vec text format: "token v1 ... vd" per line, with an
  /// optional leading "count dim" header line.
  static TokenEmbeddingTable load_text(const std::string& path);
  void save_text(const std::string& path) const;

  /// Independent N(0, 1/dim) vectors for each token, reproducible from seed.
  static TokenEmbeddingTable random(std::span<const std::string> tokens, Eigen::Index dim,
                                    std::uint64_t seed);

 private:
  Eigen::Index dim_;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
  std::vector<std::string> order_;
  Eigen::VectorXd unk_;
};

enum class EncoderKind { kAvg, kMax, kHier, kConcat, kPrecomputed };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& name);

struct EncoderSpec {
  std::string encoder_id;
  EncoderKind kind = EncoderKind::kAvg;
  Eigen::Index dim = 0;
  int ngram = 3;                                    // hier window width
  std::vector<EncoderKind> parts;                   // concat components, in order
  std::string path;                                 // precomputed embedding file
};

/// Parses "avg", "max", "hier[:n]", "concat[:avg+max+hier]" or
/// "precomputed:<path>". `token_dim` fills in the dimension of native
/// encoders; precomputed dimensions are taken from `precomputed_dim`.
EncoderSpec parse_encoder_spec(const std::string& text, Eigen::Index token_dim,
                               Eigen::Index precomputed_dim = 0);

SentenceEmbedding encode_avg(const TokenSequence& tokens, const TokenEmbeddingTable& table);
SentenceEmbedding encode_max(const TokenSequence& tokens, const TokenEmbeddingTable& table);
/// Mean of every width-`n` window (stride 1), then elementwise max over
/// windows. Sentences shorter than `n` form a single window.
SentenceEmbedding encode_hier(const TokenSequence& tokens, const TokenEmbeddingTable& table, int n = 3);
SentenceEmbedding encode_concat(std::span<const SentenceEmbedding> parts);

/// Vectors computed by an external encoder, one per corpus line.
class PrecomputedEmbeddings {
 public:
  PrecomputedEmbeddings() = default;
  explicit PrecomputedEmbeddings(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}

  /// Reads the text format, or the binary format when the file starts with
  /// the "V2SEMB01" magic. Throws FormatError unless every vector has
  /// `expected_dim` entries (0 accepts any consistent width).
  static PrecomputedEmbeddings load(const std::string& path, Eigen::Index expected_dim = 0);
  void save_text(const std::string& path) const;
  void save_binary(const std::string& path) const;

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  Eigen::Index dim() const { return rows_.cols(); }
  Eigen::VectorXd row(std::size_t line_index) const;

 private:
  Eigen::MatrixXd rows_;  // one embedding per row
};

/// One-shot lookup that loads \`spec.path\` and returns the vector for
/// \`line_index\`. Prefer Encoder for repeated lookups.
SentenceEmbedding lookup_precomputed(const EncoderSpec& spec, std::size_t line_index);

/// An immutable sentence encoder built from an EncoderSpec.
class Encoder {
 public:
  /// Native encoder over token embeddings.
  Encoder(EncoderSpec spec, std::shared_ptr<const TokenEmbeddingTable> table);
  /// Precomputed encoder; the embedding file is loaded eagerly.
  explicit Encoder(EncoderSpec spec);

  const EncoderSpec& spec() const { return spec_; }
  const std::string& id() const { return spec_.encoder_id; }
  Eigen::Index dim() const { return spec_.dim; }

  /// Precomputed encoders need `line_index`; native ones ignore the text of
  /// the line and only use `tokens`.
  SentenceEmbedding encode(const TokenSequence& tokens,
                           std::optional<std::size_t> line_index = std::nullopt) const;
  SentenceEmbedding lookup_precomputed(std::size_t line_index) const;

 private:
  SentenceEmbedding encode_native(EncoderKind kind, const TokenSequence& tokens) const;

  EncoderSpec spec_;
  std::shared_ptr<const TokenEmbeddingTable> table_;
  std::shared_ptr<const PrecomputedEmbeddings> precomputed_;
};

}  // namespace v2s

#endif  // V2S_ENCODERS_HPP
