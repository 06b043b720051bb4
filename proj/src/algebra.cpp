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

#include "v2s/algebra.hpp"

#include <cmath>

#include "v2s/errors.hpp"

namespace v2s {

namespace {

void require_compatible(const SentenceEmbedding& a, const SentenceEmbedding& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(op) + ": vectors of dimension " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()));
  }
  if (!a.encoder_id.empty() && !b.encoder_id.empty() && a.encoder_id != b.encoder_id) {
    throw DomainError(std::string(op) + ": vectors from different encoders (" + a.encoder_id + ", " + b.encoder_id +
                      ")");
  }
}

}  // namespace

SentenceEmbedding interpolate(const SentenceEmbedding& x, const SentenceEmbedding& y, double alpha,
                              bool allow_extrapolation) {
  require_compatible(x, y, "interpolate");
  if (!std::isfinite(alpha)) throw DomainError("interpolate: alpha must be finite");
  if (!allow_extrapolation && (alpha < 0.0 || alpha > 1.0)) {
    throw DomainError("interpolate: alpha outside [0, 1] needs extrapolation enabled");
  }
  const auto& id = x.encoder_id.empty() ? y.encoder_id : x.encoder_id;
  if (alpha == 1.0) return {x.values, id, std::nullopt};
  if (alpha == 0.0) return {y.values, id, std::nullopt};
  return {(alpha * x.values.array() + (1.0 - alpha) * y.values.array()).matrix(), id, std::nullopt};
}

SentenceEmbedding analogy(const SentenceEmbedding& r, const SentenceEmbedding& s, const SentenceEmbedding& v) {
  require_compatible(r, s, "analogy");
  require_compatible(r, v, "analogy");
  return {r.values - s.values + v.values, r.encoder_id, std::nullopt};
}

SentenceEmbedding analogy(const AnalogyQuery& query) { return analogy(query.r, query.s, query.v); }

GenerationResult decode_vector(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                               const Eigen::VectorXd& u, int beam_width) {
  if (!u.allFinite()) throw DomainError("decode_vector: vector contains non-finite values");
  checkpoint.check_vocabulary(vocab);
  return generate(checkpoint.decoder, vocab, u, beam_width);
}

GenerationResult decode_vector(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab,
                               const SentenceEmbedding& u, int beam_width) {
  return decode_vector(checkpoint, vocab, u.values, beam_width);
}

std::vector<std::pair<double, GenerationResult>> interpolation_sweep(const DecoderCheckpoint& checkpoint,
                                                                     const Vocabulary& vocab,
                                                                     const SentenceEmbedding& x,
                                                                     const SentenceEmbedding& y,
                                                                     std::span<const double> alphas,
                                                                     bool allow_extrapolation) {
  std::vector<std::pair<double, GenerationResult>> out;
  for (double a : alphas) {
    out.emplace_back(a, decode_vector(checkpoint, vocab, interpolate(x, y, a, allow_extrapolation)));
  }
  return out;
}

}  // namespace v2s
