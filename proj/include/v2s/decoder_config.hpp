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

#ifndef V2S_DECODER_CONFIG_HPP
#define V2S_DECODER_CONFIG_HPP

#include <string>

namespace v2s {

/// How the sentence embedding enters the recurrence.
enum class Conditioning {
  kConcat,     ///< appended to the input word embedding at every step
  kInitState,  ///< mapped linearly to the initial hidden state of every layer
};

enum class OutputHead {
  kSoftmax,
  kMos,  ///< mixture of softmaxes
};

std::string to_string(Conditioning c);
std::string to_string(OutputHead h);
Conditioning parse_conditioning(const std::string& name);
OutputHead parse_output_head(const std::string& name);

struct DecoderConfig {
  int vocab_size = 0;
  int cond_dim = 0;
  int word_dim = 256;
  int hidden_dim = 1024;
  int num_layers = 3;
  Conditioning conditioning = Conditioning::kConcat;
  OutputHead head = OutputHead::kMos;
  int mos_components = 5;
  int max_gen_len = 20;

  /// Width of the first recurrent layer's input.
  int input_dim() const { return word_dim + (conditioning == Conditioning::kConcat ? cond_dim : 0); }
  /// Number of softmax components of the head (1 for a plain softmax).
  int components() const { return head == OutputHead::kMos ? mos_components : 1; }

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

}  // namespace v2s

#endif  // V2S_DECODER_CONFIG_HPP
