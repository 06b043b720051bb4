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

#ifndef V2S_ALGEBRA_HPP
#define V2S_ALGEBRA_HPP

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v2s/corpus.hpp"
#include "v2s/decoder.hpp"
#include "v2s/encoders.hpp"

namespace v2s {

/// a : b :: z : c, with r, s, v the embeddings of a, b, c.
struct AnalogyQuery {
  std::string a_text, b_text, c_text;
  SentenceEmbedding r, s, v;
};

/// z(alpha) = alpha * x + (1 - alpha) * y. The endpoints return the inputs
/// unchanged. Alpha outside [0, 1] throws DomainError unless
/// `allow_extrapolation` is set.
SentenceEmbedding interpolate(const SentenceEmbedding& x, const SentenceEmbedding& y, double alpha,
                              bool allow_extrapolation = false);

/// u = r - s + v.
SentenceEmbedding analogy(const SentenceEmbedding& r, const SentenceEmbedding& s, const SentenceEmbedding& v);
SentenceEmbedding analogy(const AnalogyQuery& query);

/// Greedy decoding of an arbitrary finite vector; it need not be the
/// encoding of any sentence.
GenerationResult decode_vector(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                               const Eigen::VectorXd& u, int beam_width = 1);
GenerationResult decode_vector(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                               const SentenceEmbedding& u, int beam_width = 1);

/// Decodes z(alpha) for each alpha in order.
std::vector<std::pair<double, GenerationResult>> interpolation_sweep(const DecoderCheckpoint& checkpoint,
                                                                     const Vocabulary& vocab,
                                                                     const SentenceEmbedding& x,
                                                                     const SentenceEmbedding& y,
                                                                     std::span<const double> alphas,
                                                                     bool allow_extrapolation = false);

}  // namespace v2s

#endif  // V2S_ALGEBRA_HPP
