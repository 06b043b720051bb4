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

#include "v2s/encoders.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "v2s/errors.hpp"

namespace v2s {

namespace {

constexpr char kBinaryMagic[8] = {'V', '2', 'S', 'E', 'M', 'B', '0', '1'};

void require_non_empty(const TokenSequence& tokens, const char* what) {
  if (tokens.empty()) throw DomainError(std::string(what) + ": empty token sequence");
}

void require_finite(const Eigen::VectorXd& v, const std::string& what) {
  if (!v.allFinite()) throw DomainError(what + ": non-finite value");
}

std::vector<double> parse_doubles(std::string_view line, const std::string& where) {
  std::vector<double> values;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + j, v);
    if (ec != std::errc() || ptr != line.data() + j) {
      throw FormatError(where + ": cannot parse number '" + std::string(line.substr(i, j - i)) + "'");
    }
    values.push_back(v);
    i = j;
  }
  return values;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw FormatError(path + ": truncated binary embedding file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

// ---------------------------------------------------------------------------

TokenEmbeddingTable::TokenEmbeddingTable(Eigen::Index dim) : dim_(dim), unk_(Eigen::VectorXd::Zero(dim)) {
  if (dim < 1) throw ConfigError("token embedding dimension must be positive");
}

void TokenEmbeddingTable::add(const std::string& token, const Eigen::VectorXd& vector) {
  if (vector.size() != dim_) {
    throw DimensionError("token vector for '" + token + "' has " + std::to_string(vector.size()) +
                         " entries, expected " + std::to_string(dim_));
  }
  require_finite(vector, "token vector for '" + token + "'");
  if (token == "<unk>") {
    unk_ = vector;
    return;
  }
  if (vectors_.insert_or_assign(token, vector).second) order_.push_back(token);
}

void TokenEmbeddingTable::set_unk(const Eigen::VectorXd& vector) { add("<unk>", vector); }

const Eigen::VectorXd& TokenEmbeddingTable::lookup(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? unk_ : it->second;
}

TokenEmbeddingTable TokenEmbeddingTable::load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open token embedding file: " + path);
  std::string line;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sep = line.find_first_of(" \t");
    if (sep == std::string::npos) throw FormatError(path + ":" + std::to_string(n) + ": no values");
    auto values = parse_doubles(std::string_view(line).substr(sep + 1), path + ":" + std::to_string(n));
    if (n == 1 && values.size() == 1) continue;  // "count dim" header
    rows.emplace_back(line.substr(0, sep), std::move(values));
  }
  if (rows.empty()) throw FormatError(path + ": no token vectors");
  TokenEmbeddingTable table(static_cast<Eigen::Index>(rows.front().second.size()));
  for (auto& [token, values] : rows) {
    table.add(token, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return table;
}

void TokenEmbeddingTable::save_text(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write token embedding file: " + path);
  out.precision(17);
  auto write_row = [&](const std::string& token, const Eigen::VectorXd& v) {
    out << token;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
    out << '\n';
  };
  out << order_.size() + 1 << ' ' << dim_ << '\n';
  write_row("<unk>", unk_);
  for (const auto& token : order_) write_row(token, vectors_.at(token));
}

TokenEmbeddingTable TokenEmbeddingTable::random(std::span<const std::string> tokens, Eigen::Index dim,
                                                std::uint64_t seed) {
  TokenEmbeddingTable table(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  Eigen::VectorXd v(dim);
  for (const auto& token : tokens) {
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
    table.add(token, v);
  }
  return table;
}

// ---------------------------------------------------------------------------

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kAvg: return "avg";
    case EncoderKind::kMax: return "max";
    case EncoderKind::kHier: return "hier";
    case EncoderKind::kConcat: return "concat";
    case EncoderKind::kPrecomputed: return "precomputed";
  }
  return "unknown";
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "avg") return EncoderKind::kAvg;
  if (name == "max") return EncoderKind::kMax;
  if (name == "hier") return EncoderKind::kHier;
  if (name == "concat") return EncoderKind::kConcat;
  if (name == "precomputed") return EncoderKind::kPrecomputed;
  throw ConfigError("unknown encoder kind: " + name);
}

EncoderSpec parse_encoder_spec(const std::string& text, Eigen::Index token_dim, Eigen::Index precomputed_dim) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  EncoderSpec spec;
  spec.kind = parse_encoder_kind(head);
  spec.encoder_id = text;
  switch (spec.kind) {
    case EncoderKind::kAvg:
    case EncoderKind::kMax:
      spec.dim = token_dim;
      break;
    case EncoderKind::kHier:
      if (!arg.empty()) {
        int n = 0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), n);
        if (ec != std::errc() || ptr != arg.data() + arg.size()) throw ConfigError("bad hier width: " + arg);
        spec.ngram = n;
      }
      if (spec.ngram < 1) throw ConfigError("hier window width must be positive");
      spec.dim = token_dim;
      break;
    case EncoderKind::kConcat: {
      std::string list = arg.empty() ? "avg+max+hier" : arg;
      std::stringstream ss(list);
      std::string part;
      while (std::getline(ss, part, '+')) {
        const auto kind = parse_encoder_kind(part);
        if (kind == EncoderKind::kConcat || kind == EncoderKind::kPrecomputed) {
          throw ConfigError("concat parts must be native encoders: " + part);
        }
        spec.parts.push_back(kind);
      }
      spec.dim = token_dim * static_cast<Eigen::Index>(spec.parts.size());
      break;
    }
    case EncoderKind::kPrecomputed:
      if (arg.empty()) throw ConfigError("precomputed encoder needs a file path");
      spec.path = arg;
      spec.dim = precomputed_dim;
      break;
  }
  if (spec.dim < 1 && spec.kind != EncoderKind::kPrecomputed) throw ConfigError("encoder dimension must be positive");
  return spec;
}

// ---------------------------------------------------------------------------

SentenceEmbedding encode_avg(const TokenSequence& tokens, const TokenEmbeddingTable& table) {
  require_non_empty(tokens, "encode_avg");
  // Summing in sorted token order makes the result bitwise invariant under
  // permutations of the input.
  std::vector<const std::string*> sorted;
  sorted.reserve(tokens.size());
  for (const auto& t : tokens.tokens) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return *a < *b; });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  for (const auto* t : sorted) sum += table.lookup(*t);
  return {sum / static_cast<double>(tokens.size()), "avg", std::nullopt};
}

SentenceEmbedding encode_max(const TokenSequence& tokens, const TokenEmbeddingTable& table) {
  require_non_empty(tokens, "encode_max");
  Eigen::VectorXd out = table.lookup(tokens.tokens.front());
  for (std::size_t i = 1; i < tokens.size(); ++i) out = out.cwiseMax(table.lookup(tokens.tokens[i]));
  return {std::move(out), "max", std::nullopt};
}

SentenceEmbedding encode_hier(const TokenSequence& tokens, const TokenEmbeddingTable& table, int n) {
  if (n < 1) throw ConfigError("hier window width must be positive");
  require_non_empty(tokens, "encode_hier");
  const auto len = tokens.size();
  const auto width = std::min<std::size_t>(static_cast<std::size_t>(n), len);
  Eigen::VectorXd out;
  for (std::size_t start = 0; start + width <= len; ++start) {
    Eigen::VectorXd window = Eigen::VectorXd::Zero(table.dim());
    for (std::size_t k = start; k < start + width; ++k) window += table.lookup(tokens.tokens[k]);
    window /= static_cast<double>(width);
    out = start == 0 ? window : out.cwiseMax(window).eval();
  }
  return {std::move(out), "hier", std::nullopt};
}

SentenceEmbedding encode_concat(std::span<const SentenceEmbedding> parts) {
  if (parts.empty()) throw DomainError("encode_concat: no parts");
  Eigen::Index dim = 0;
  for (const auto& p : parts) {
    if (p.source_line != parts.front().source_line) {
      throw DomainError("encode_concat: parts come from different sentences");
    }
    dim += p.dim();
  }
  SentenceEmbedding out{Eigen::VectorXd(dim), {}, parts.front().source_line};
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.values.segment(offset, p.dim()) = p.values;
    offset += p.dim();
    out.encoder_id += (out.encoder_id.empty() ? "" : "+") + p.encoder_id;
  }
  return out;
}

// ---------------------------------------------------------------------------

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::string& path, Eigen::Index expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() == sizeof magic && std::memcmp(magic, kBinaryMagic, sizeof magic) == 0) {
    const auto count = read_le<std::uint64_t>(in, path);
    const auto dim = read_le<std::uint32_t>(in, path);
    if (expected_dim > 0 && dim != expected_dim) {
      throw FormatError(path + ": embedding dimension " + std::to_string(dim) + ", expected " +
                        std::to_string(expected_dim));
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < rows.cols(); ++c) rows(r, c) = read_le<float>(in, path);
    }
    if (!rows.allFinite()) throw FormatError(path + ": non-finite embedding value");
    return PrecomputedEmbeddings(std::move(rows));
  }

  in.clear();
  in.seekg(0);
  std::vector<std::vector<double>> lines;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto where = path + ":" + std::to_string(n);
    auto values = parse_doubles(line, where);
    const auto width = expected_dim > 0 ? static_cast<std::size_t>(expected_dim)
                                        : (lines.empty() ? values.size() : lines.front().size());
    if (values.size() != width || width == 0) {
      throw FormatError(where + ": vector has " + std::to_string(values.size()) + " entries, expected " +
                        std::to_string(width));
    }
    lines.push_back(std::move(values));
  }
  if (lines.empty()) return PrecomputedEmbeddings(Eigen::MatrixXd(0, expected_dim));
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(lines.front().size()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) rows(r, c) = lines[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  if (!rows.allFinite()) throw FormatError(path + ": non-finite embedding value");
  return PrecomputedEmbeddings(std::move(rows));
}

void PrecomputedEmbeddings::save_text(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path);
  out.precision(17);
  for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows_.cols(); ++c) out << (c ? " " : "") << rows_(r, c);
    out << '\n';
  }
}

void PrecomputedEmbeddings::save_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path);
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(rows_.rows()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows_.cols()));
  for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows_.cols(); ++c) write_le<float>(out, static_cast<float>(rows_(r, c)));
  }
}

Eigen::VectorXd PrecomputedEmbeddings::row(std::size_t line_index) const {
  if (line_index >= size()) {
    throw LookupError("embedding index " + std::to_string(line_index) + " out of range (" +
                      std::to_string(size()) + " vectors)");
  }
  return rows_.row(static_cast<Eigen::Index>(line_index)).transpose();
}

SentenceEmbedding lookup_precomputed(const EncoderSpec& spec, std::size_t line_index) {
  return Encoder(spec).lookup_precomputed(line_index);
}

// ---------------------------------------------------------------------------

Encoder::Encoder(EncoderSpec spec, std::shared_ptr<const TokenEmbeddingTable> table)
    : spec_(std::move(spec)), table_(std::move(table)) {
  if (spec_.kind == EncoderKind::kPrecomputed) throw ConfigError("precomputed encoder takes no token table");
  if (!table_) throw ConfigError("native encoder needs a token embedding table");
  if (spec_.kind == EncoderKind::kConcat && spec_.parts.empty()) {
    spec_.parts = {EncoderKind::kAvg, EncoderKind::kMax, EncoderKind::kHier};
  }
  const auto parts = spec_.kind == EncoderKind::kConcat ? static_cast<Eigen::Index>(spec_.parts.size()) : 1;
  const auto expected = table_->dim() * parts;
  if (spec_.dim == 0) spec_.dim = expected;
  if (spec_.dim != expected) {
    throw ConfigError("encoder '" + spec_.encoder_id + "' declares dim " + std::to_string(spec_.dim) +
                      " but produces " + std::to_string(expected));
  }
  if (spec_.encoder_id.empty()) spec_.encoder_id = to_string(spec_.kind);
}

Encoder::Encoder(EncoderSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind != EncoderKind::kPrecomputed) throw ConfigError("native encoder needs a token embedding table");
  precomputed_ = std::make_shared<const PrecomputedEmbeddings>(PrecomputedEmbeddings::load(spec_.path, spec_.dim));
  if (spec_.dim == 0) spec_.dim = precomputed_->dim();
  if (spec_.encoder_id.empty()) spec_.encoder_id = "precomputed";
}

SentenceEmbedding Encoder::encode_native(EncoderKind kind, const TokenSequence& tokens) const {
  switch (kind) {
    case EncoderKind::kAvg: return encode_avg(tokens, *table_);
    case EncoderKind::kMax: return encode_max(tokens, *table_);
    case EncoderKind::kHier: return encode_hier(tokens, *table_, spec_.ngram);
    default: break;
  }
  throw ConfigError("not a native encoder kind: " + to_string(kind));
}

SentenceEmbedding Encoder::encode(const TokenSequence& tokens, std::optional<std::size_t> line_index) const {
  SentenceEmbedding out;
  if (spec_.kind == EncoderKind::kPrecomputed) {
    if (!line_index) throw LookupError("precomputed encoder '" + spec_.encoder_id + "' needs a line index");
    return lookup_precomputed(*line_index);
  }
  if (spec_.kind == EncoderKind::kConcat) {
    std::vector<SentenceEmbedding> parts;
    for (auto kind : spec_.parts) parts.push_back(encode_native(kind, tokens));
    out = encode_concat(parts);
  } else {
    out = encode_native(spec_.kind, tokens);
  }
  out.encoder_id = spec_.encoder_id;
  out.source_line = line_index;
  return out;
}

SentenceEmbedding Encoder::lookup_precomputed(std::size_t line_index) const {
  if (!precomputed_) throw ConfigError("encoder '" + spec_.encoder_id + "' is not precomputed");
  return {precomputed_->row(line_index), spec_.encoder_id, line_index};
}

}  // namespace v2s
