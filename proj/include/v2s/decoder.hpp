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

#ifndef V2S_DECODER_HPP
#define V2S_DECODER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2s/conditional_lstm.hpp"
#include "v2s/corpus.hpp"
#include "v2s/decoder_config.hpp"
#include "v2s/encoders.hpp"

namespace v2s {

using Decoder = ConditionalLstm<double>;
extern template class ConditionalLstm<double>;

/// Decoder with deterministic parameters for (config, seed).
Decoder init_decoder(const DecoderConfig& config, std::uint64_t seed);

struct TrainingOptions {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct TrainingMeta {
  std::size_t corpus_size = 0;
  int epochs = 0;
  double initial_loss = 0.0;  // mean loss over the corpus before the first update
  double final_loss = 0.0;    // mean loss of the last epoch
  std::vector<double> epoch_losses;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Teacher-forced training with Adam and global gradient-norm clipping.
/// `corpus[i]` (ids assigned) is reconstructed from `conditions[i]`. The
/// conditions are fixed inputs; nothing upstream is updated. Throws
/// TrainingError if the loss becomes non-finite.
TrainingMeta train(Decoder& decoder, std::span<const TokenSequence> corpus,
                   std::span<const SentenceEmbedding> conditions, const TrainingOptions& options,
                   const EpochCallback& on_epoch = {});

/// Encodes the corpus with the frozen `encoder` and trains on it.
TrainingMeta train(Decoder& decoder, const Encoder& encoder, std::span<const TokenSequence> corpus,
                   const TrainingOptions& options, const EpochCallback& on_epoch = {});

/// Trained decoder plus what it was trained against.
struct DecoderCheckpoint {
  Decoder decoder;
  std::string vocab_hash;
  std::string encoder_id;
  std::optional<EncoderSpec> encoder;
  TrainingMeta meta;

  const DecoderConfig& config() const { return decoder.config(); }

  /// Throws ConfigError when `vocab` is not the vocabulary this decoder
  /// was trained with.
  void check_vocabulary(const Vocabulary& vocab) const;

  void save(const std::string& path) const;
  static DecoderCheckpoint load(const std::string& path);
  /// Loads and verifies the vocabulary digest.
  static DecoderCheckpoint load(const std::string& path, const Vocabulary& vocab);
};

struct GenerationResult {
  std::optional<TokenSequence> input;
  TokenSequence output;
  bool terminated = false;  // EOS emitted before max_gen_len
};

/// Greedy decoding from a sentence embedding.
/// Greedy decoding by default; `beam_width` > 1 switches to beam search.
GenerationResult generate(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                          const SentenceEmbedding& cond, int beam_width = 1);
GenerationResult generate(const Decoder& decoder, const Vocabulary& vocab, const Eigen::VectorXd& cond,
                          int beam_width = 1);

/// Generation for many vectors; results are in input order.
std::vector<GenerationResult> generate_batch(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                                             std::span<const SentenceEmbedding> conds);

}  // namespace v2s

#endif  // V2S_DECODER_HPP
