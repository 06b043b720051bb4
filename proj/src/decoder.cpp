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

#include "v2s/decoder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "v2s/errors.hpp"
#include "v2s/serialization.hpp"

namespace v2s {

template class ConditionalLstm<double>;

namespace {

constexpr char kCheckpointMagic[8] = {'V', '2', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw FormatError(path + ": truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

/// Adam with bias correction over a DecoderParameters tree.
class Adam {
 public:
  Adam(const DecoderParameters<double>& like, double learning_rate)
      : lr_(learning_rate), m_(like.zeros_like()), v_(like.zeros_like()) {}

  void update(DecoderParameters<double>& params, const DecoderParameters<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    auto p = params.named();
    auto g = grad.named();
    auto m = m_.named();
    auto v = v_.named();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i].second->array() = kBeta1 * m[i].second->array() + (1 - kBeta1) * g[i].second->array();
      v[i].second->array() = kBeta2 * v[i].second->array() + (1 - kBeta2) * g[i].second->array().square();
      p[i].second->array() -=
          lr_ * (m[i].second->array() / c1) / ((v[i].second->array() / c2).sqrt() + kEpsilon);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  double lr_;
  int t_ = 0;
  DecoderParameters<double> m_, v_;
};

double global_norm(const DecoderParameters<double>& grad) {
  double sq = 0.0;
  for (const auto& [name, m] : grad.named()) sq += m->squaredNorm();
  return std::sqrt(sq);
}

/// Token-weighted mean loss over the whole corpus, in chunks.
double corpus_loss(const Decoder& decoder, const std::vector<std::vector<int>>& ids, const Eigen::MatrixXd& conds,
                   std::size_t chunk) {
  double total = 0.0, tokens = 0.0;
  for (std::size_t start = 0; start < ids.size(); start += chunk) {
    const auto n = std::min(chunk, ids.size() - start);
    std::span<const std::vector<int>> batch(ids.data() + start, n);
    double batch_tokens = 0.0;
    for (const auto& s : batch) batch_tokens += static_cast<double>(s.size() + 1);
    total += decoder.loss(batch, conds.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n))) *
             batch_tokens;
    tokens += batch_tokens;
  }
  return total / tokens;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Conditioning c) { return c == Conditioning::kConcat ? "concat" : "init_state"; }
std::string to_string(OutputHead h) { return h == OutputHead::kSoftmax ? "softmax" : "mos"; }

Conditioning parse_conditioning(const std::string& name) {
  if (name == "concat") return Conditioning::kConcat;
  if (name == "init_state") return Conditioning::kInitState;
  throw ConfigError("unknown conditioning mode: " + name);
}

OutputHead parse_output_head(const std::string& name) {
  if (name == "softmax") return OutputHead::kSoftmax;
  if (name == "mos") return OutputHead::kMos;
  throw ConfigError("unknown output head: " + name);
}

void DecoderConfig::validate() const {
  auto positive = [](int v, const char* field) {
    if (v < 1) throw ConfigError(std::string("decoder config: ") + field + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(cond_dim, "cond_dim");
  positive(word_dim, "word_dim");
  positive(hidden_dim, "hidden_dim");
  positive(num_layers, "num_layers");
  positive(max_gen_len, "max_gen_len");
  if (head == OutputHead::kMos) positive(mos_components, "mos_components");
  if (vocab_size <= Vocabulary::kNumSpecials) {
    throw ConfigError("decoder config: vocab_size must exceed the four special tokens");
  }
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const DecoderConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size},     {"cond_dim", c.cond_dim},
                     {"word_dim", c.word_dim},         {"hidden_dim", c.hidden_dim},
                     {"num_layers", c.num_layers},     {"conditioning", to_string(c.conditioning)},
                     {"head", to_string(c.head)},      {"mos_components", c.mos_components},
                     {"max_gen_len", c.max_gen_len}};
}

void from_json(const nlohmann::json& j, DecoderConfig& c) {
  DecoderConfig d;
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.cond_dim = j.value("cond_dim", d.cond_dim);
  c.word_dim = j.value("word_dim", d.word_dim);
  c.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  c.num_layers = j.value("num_layers", d.num_layers);
  c.conditioning = parse_conditioning(j.value("conditioning", to_string(d.conditioning)));
  c.head = parse_output_head(j.value("head", to_string(d.head)));
  c.mos_components = j.value("mos_components", d.mos_components);
  c.max_gen_len = j.value("max_gen_len", d.max_gen_len);
}

void to_json(nlohmann::json& j, const EncoderSpec& s) {
  std::vector<std::string> parts;
  for (auto k : s.parts) parts.push_back(to_string(k));
  j = nlohmann::json{{"encoder_id", s.encoder_id}, {"kind", to_string(s.kind)}, {"dim", s.dim},
                     {"ngram", s.ngram},           {"parts", parts},              {"path", s.path}};
}

void from_json(const nlohmann::json& j, EncoderSpec& s) {
  s.encoder_id = j.at("encoder_id").get<std::string>();
  s.kind = parse_encoder_kind(j.at("kind").get<std::string>());
  s.dim = j.value("dim", Eigen::Index{0});
  s.ngram = j.value("ngram", 3);
  s.parts.clear();
  for (const auto& p : j.value("parts", std::vector<std::string>{})) s.parts.push_back(parse_encoder_kind(p));
  s.path = j.value("path", std::string{});
}

void to_json(nlohmann::json& j, const TrainingOptions& o) {
  j = nlohmann::json{{"epochs", o.epochs},
                     {"batch_size", o.batch_size},
                     {"learning_rate", o.learning_rate},
                     {"clip_norm", o.clip_norm},
                     {"seed", o.seed}};
}

void from_json(const nlohmann::json& j, TrainingOptions& o) {
  TrainingOptions d;
  o.epochs = j.value("epochs", d.epochs);
  o.batch_size = j.value("batch_size", d.batch_size);
  o.learning_rate = j.value("learning_rate", d.learning_rate);
  o.clip_norm = j.value("clip_norm", d.clip_norm);
  o.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const TrainingMeta& m) {
  j = nlohmann::json{{"corpus_size", m.corpus_size},   {"epochs", m.epochs},
                     {"initial_loss", m.initial_loss}, {"final_loss", m.final_loss},
                     {"epoch_losses", m.epoch_losses}};
}

void from_json(const nlohmann::json& j, TrainingMeta& m) {
  m.corpus_size = j.value("corpus_size", std::size_t{0});
  m.epochs = j.value("epochs", 0);
  m.initial_loss = j.value("initial_loss", 0.0);
  m.final_loss = j.value("final_loss", 0.0);
  m.epoch_losses = j.value("epoch_losses", std::vector<double>{});
}

// ---------------------------------------------------------------------------

Decoder init_decoder(const DecoderConfig& config, std::uint64_t seed) { return Decoder(config, seed); }

TrainingMeta train(Decoder& decoder, std::span<const TokenSequence> corpus,
                   std::span<const SentenceEmbedding> conditions, const TrainingOptions& options,
                   const EpochCallback& on_epoch) {
  if (corpus.empty()) throw DomainError("cannot train on an empty corpus");
  if (corpus.size() != conditions.size()) throw DimensionError("one conditioning vector per sentence required");
  if (options.epochs < 1 || options.batch_size < 1 || !(options.learning_rate > 0) || !(options.clip_norm > 0)) {
    throw ConfigError("training options must be positive");
  }
  const auto& config = decoder.config();
  std::vector<std::vector<int>> ids;
  ids.reserve(corpus.size());
  Eigen::MatrixXd conds(config.cond_dim, static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].has_ids()) throw DomainError("training sentence " + std::to_string(i) + " has no vocabulary ids");
    if (conditions[i].dim() != config.cond_dim) {
      throw DimensionError("conditioning vector " + std::to_string(i) + " has " + std::to_string(conditions[i].dim()) +
                           " entries, decoder expects " + std::to_string(config.cond_dim));
    }
    if (!conditions[i].values.allFinite()) throw DomainError("non-finite conditioning vector " + std::to_string(i));
    ids.push_back(corpus[i].ids);
    conds.col(static_cast<Eigen::Index>(i)) = conditions[i].values;
  }

  const auto batch_size = static_cast<std::size_t>(options.batch_size);
  TrainingMeta meta;
  meta.corpus_size = corpus.size();
  meta.initial_loss = corpus_loss(decoder, ids, conds, batch_size);

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Adam adam(decoder.parameters(), options.learning_rate);
  auto grad = decoder.parameters().zeros_like();
  std::vector<std::vector<int>> batch;
  Eigen::MatrixXd batch_conds;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    // Fisher-Yates with raw engine output keeps shuffles identical across standard libraries
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0, token_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const auto n = std::min(batch_size, order.size() - start);
      batch.clear();
      batch_conds.resize(config.cond_dim, static_cast<Eigen::Index>(n));
      double tokens = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto idx = order[start + k];
        batch.push_back(ids[idx]);
        batch_conds.col(static_cast<Eigen::Index>(k)) = conds.col(static_cast<Eigen::Index>(idx));
        tokens += static_cast<double>(ids[idx].size() + 1);
      }
      for (auto& [name, m] : grad.named()) m->setZero();
      const double loss = decoder.loss_and_gradient(batch, batch_conds, &grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                            std::to_string(start));
      }
      const double norm = global_norm(grad);
      if (!std::isfinite(norm)) throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch));
      if (norm > options.clip_norm) {
        for (auto& [name, m] : grad.named()) *m *= options.clip_norm / norm;
      }
      adam.update(decoder.parameters(), grad);
      loss_sum += loss * tokens;
      token_sum += tokens;
    }
    const double mean_loss = loss_sum / token_sum;
    meta.epoch_losses.push_back(mean_loss);
    meta.epochs = epoch;
    meta.final_loss = mean_loss;
    if (on_epoch) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      on_epoch(EpochRecord{epoch, mean_loss, elapsed.count()});
    }
  }
  return meta;
}

TrainingMeta train(Decoder& decoder, const Encoder& encoder, std::span<const TokenSequence> corpus,
                   const TrainingOptions& options, const EpochCallback& on_epoch) {
  if (encoder.dim() != decoder.config().cond_dim) {
    throw DimensionError("encoder '" + encoder.id() + "' has dim " + std::to_string(encoder.dim()) +
                         ", decoder expects " + std::to_string(decoder.config().cond_dim));
  }
  std::vector<SentenceEmbedding> conditions;
  conditions.reserve(corpus.size());
  for (const auto& s : corpus) conditions.push_back(encoder.encode(s));
  return train(decoder, corpus, conditions, options, on_epoch);
}

// ---------------------------------------------------------------------------

void DecoderCheckpoint::check_vocabulary(const Vocabulary& vocab) const {
  if (vocab.digest() != vocab_hash) {
    throw ConfigError("vocabulary digest " + vocab.digest() + " does not match the checkpoint's " + vocab_hash);
  }
  if (static_cast<int>(vocab.size()) != config().vocab_size) {
    throw ConfigError("vocabulary size does not match the checkpoint");
  }
}

void DecoderCheckpoint::save(const std::string& path) const {
  nlohmann::json header;
  header["format"] = 1;
  header["scalar"] = "f64";
  header["config"] = config();
  header["vocab_hash"] = vocab_hash;
  header["encoder_id"] = encoder_id;
  header["encoder"] = encoder ? nlohmann::json(*encoder) : nlohmann::json(nullptr);
  header["training_meta"] = meta;
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : decoder.parameters().named()) {
    tensors.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : decoder.parameters().named()) {
    for (Eigen::Index k = 0; k < m->size(); ++k) write_le<double>(out, m->data()[k]);
  }
  if (!out) throw IoError("write failed: " + path);
}

DecoderCheckpoint DecoderCheckpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8] = {};
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError(path + ": not a decoder checkpoint");
  }
  const auto header_len = read_le<std::uint64_t>(in, path);
  if (header_len > (std::uint64_t{1} << 30)) throw FormatError(path + ": implausible header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw FormatError(path + ": truncated header");

  DecoderCheckpoint ckpt;
  DecoderParameters<double> params;
  DecoderConfig config;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.value("scalar", std::string{}) != "f64") throw FormatError(path + ": unsupported scalar type");
    config = header.at("config").get<DecoderConfig>();
    ckpt.vocab_hash = header.at("vocab_hash").get<std::string>();
    ckpt.encoder_id = header.at("encoder_id").get<std::string>();
    if (!header.at("encoder").is_null()) ckpt.encoder = header.at("encoder").get<EncoderSpec>();
    ckpt.meta = header.at("training_meta").get<TrainingMeta>();
    // allocate with the right shapes, then overwrite from the file
    params = Decoder(config, 0).parameters();
    auto named = params.named();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != named.size()) throw FormatError(path + ": tensor count does not match the config");
    for (std::size_t i = 0; i < named.size(); ++i) {
      const auto& t = tensors[i];
      if (t.at("name").get<std::string>() != named[i].first || t.at("rows").get<Eigen::Index>() != named[i].second->rows() ||
          t.at("cols").get<Eigen::Index>() != named[i].second->cols()) {
        throw FormatError(path + ": tensor " + named[i].first + " does not match the config");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad checkpoint header: " + e.what());
  }
  for (auto& [name, m] : params.named()) {
    for (Eigen::Index k = 0; k < m->size(); ++k) m->data()[k] = read_le<double>(in, path);
  }
  ckpt.decoder = Decoder(config, std::move(params));
  return ckpt;
}

DecoderCheckpoint DecoderCheckpoint::load(const std::string& path, const Vocabulary& vocab) {
  auto ckpt = load(path);
  ckpt.check_vocabulary(vocab);
  return ckpt;
}

// ---------------------------------------------------------------------------

GenerationResult generate(const Decoder& decoder, const Vocabulary& vocab, const Eigen::VectorXd& cond,
                          int beam_width) {
  if (cond.size() != decoder.config().cond_dim) {
    throw DimensionError("conditioning vector has " + std::to_string(cond.size()) + " entries, decoder expects " +
                         std::to_string(decoder.config().cond_dim));
  }
  auto [ids, terminated] = beam_width == 1 ? decoder.greedy(cond) : decoder.beam(cond, beam_width);
  return GenerationResult{std::nullopt, vocab.from_ids(ids), terminated};
}

GenerationResult generate(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                          const SentenceEmbedding& cond, int beam_width) {
  checkpoint.check_vocabulary(vocab);
  return generate(checkpoint.decoder, vocab, cond.values, beam_width);
}

std::vector<GenerationResult> generate_batch(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                                             std::span<const SentenceEmbedding> conds) {
  checkpoint.check_vocabulary(vocab);
  std::vector<GenerationResult> out;
  out.reserve(conds.size());
  for (const auto& c : conds) out.push_back(generate(checkpoint.decoder, vocab, c.values));
  return out;
}

}  // namespace v2s
