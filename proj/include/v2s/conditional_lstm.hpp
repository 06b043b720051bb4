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

#ifndef V2S_CONDITIONAL_LSTM_HPP
#define V2S_CONDITIONAL_LSTM_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v2s/corpus.hpp"
#include "v2s/decoder_config.hpp"
#include "v2s/errors.hpp"

namespace v2s {

/// Learned tensors of the conditional LSTM language model. Biases are stored
/// as single-column matrices so that every tensor has the same type.
template <typename Scalar>
struct DecoderParameters {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix embedding;  // word_dim x vocab
  // per layer; gate rows are ordered input, forget, cell, output
  std::vector<Matrix> w_input;   // 4H x in
  std::vector<Matrix> w_hidden;  // 4H x H
  std::vector<Matrix> bias;      // 4H x 1
  // init_state conditioning, one map per layer
  std::vector<Matrix> init_w;  // H x d
  std::vector<Matrix> init_b;  // H x 1
  // mixture of softmaxes: K context projections and the mixture gate
  Matrix ctx_w;   // K*H x H
  Matrix ctx_b;   // K*H x 1
  Matrix gate_w;  // K x H
  Matrix gate_b;  // K x 1
  Matrix out_w;   // vocab x H
  Matrix out_b;   // vocab x 1

  /// Every non-empty tensor with a stable name, in serialization order.
  std::vector<std::pair<std::string, Matrix*>> named() {
    std::vector<std::pair<std::string, Matrix*>> out;
    auto add = [&](std::string name, Matrix& m) {
      if (m.size() > 0) out.emplace_back(std::move(name), &m);
    };
    add("embedding", embedding);
    for (std::size_t l = 0; l < w_input.size(); ++l) {
      const auto p = "lstm." + std::to_string(l) + ".";
      add(p + "w_input", w_input[l]);
      add(p + "w_hidden", w_hidden[l]);
      add(p + "bias", bias[l]);
    }
    for (std::size_t l = 0; l < init_w.size(); ++l) {
      const auto p = "init." + std::to_string(l) + ".";
      add(p + "weight", init_w[l]);
      add(p + "bias", init_b[l]);
    }
    add("mos.ctx_w", ctx_w);
    add("mos.ctx_b", ctx_b);
    add("mos.gate_w", gate_w);
    add("mos.gate_b", gate_b);
    add("out.weight", out_w);
    add("out.bias", out_b);
    return out;
  }

  std::vector<std::pair<std::string, const Matrix*>> named() const {
    auto mutable_list = const_cast<DecoderParameters*>(this)->named();
    return {mutable_list.begin(), mutable_list.end()};
  }

  DecoderParameters zeros_like() const {
    DecoderParameters z = *this;
    for (auto& [name, m] : z.named()) m->setZero();
    return z;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : named()) n += static_cast<std::size_t>(m->size());
    return n;
  }
};

/// The recurrent decoder: an LSTM language model conditioned on a sentence
/// embedding, with either a softmax or a mixture-of-softmaxes output head.
template <typename Scalar>
class ConditionalLstm {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Parameters = DecoderParameters<Scalar>;

  /// Per-layer hidden and cell state, one column per sequence.
  struct State {
    std::vector<Matrix> h;
    std::vector<Matrix> c;
  };

  ConditionalLstm() = default;

  /// Deterministic initialization from `seed`.
  ConditionalLstm(const DecoderConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    allocate();
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Matrix& m, double scale) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          // 53-bit uniform in [0, 1), independent of the standard library's distributions
          const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
          m(i, j) = static_cast<Scalar>((2.0 * u - 1.0) * scale);
        }
      }
    };
    const double h_scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
    fill(params_.embedding, 0.1);
    for (int l = 0; l < config_.num_layers; ++l) {
      fill(params_.w_input[l], h_scale);
      fill(params_.w_hidden[l], h_scale);
      params_.bias[l].middleRows(config_.hidden_dim, config_.hidden_dim).setOnes();
    }
    for (auto& w : params_.init_w) fill(w, 1.0 / std::sqrt(static_cast<double>(config_.cond_dim)));
    if (config_.head == OutputHead::kMos) {
      fill(params_.ctx_w, h_scale);
      fill(params_.gate_w, h_scale);
    }
    fill(params_.out_w, h_scale);
  }

  /// Adopts existing parameters; throws DimensionError on any shape mismatch.
  ConditionalLstm(const DecoderConfig& config, Parameters params) : config_(config) {
    config_.validate();
    allocate();
    auto expected = params_.named();
    auto given = params.named();
    if (expected.size() != given.size()) throw DimensionError("decoder parameter count mismatch");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i].first != given[i].first || expected[i].second->rows() != given[i].second->rows() ||
          expected[i].second->cols() != given[i].second->cols()) {
        throw DimensionError("decoder parameter shape mismatch at " + given[i].first);
      }
    }
    params_ = std::move(params);
  }

  const DecoderConfig& config() const { return config_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }

  /// Starting state for one sequence: zeros, or the linear image of `cond`
  /// in init-state mode (cell state zero).
  State initial_state(const Vector& cond) const {
    check_cond(cond.size());
    Matrix c(cond);
    return initial_state_batch(c);
  }

  /// One decoding step: returns the next-token distribution and the new
  /// state. In init-state mode `cond` only contributes through
  /// initial_state and is ignored here (its width is still checked).
  std::pair<Vector, State> step(int prev_token, const State& state, const Vector& cond) const {
    check_cond(cond.size());
    check_state(state);
    if (prev_token < 0 || prev_token >= config_.vocab_size) {
      throw DomainError("token id out of range: " + std::to_string(prev_token));
    }
    State next = state;
    Matrix x = input_matrix(std::span<const int>(&prev_token, 1), Matrix(cond));
    Matrix top = advance(x, next, nullptr);
    return {head_probabilities(top).col(0), std::move(next)};
  }

  /// Output distribution for a top-layer hidden vector.
  Vector head_distribution(const Vector& h_top) const {
    if (h_top.size() != config_.hidden_dim) throw DimensionError("hidden vector width mismatch");
    return head_probabilities(Matrix(h_top)).col(0);
  }

  /// Mixture weights of the MOS head (a single weight 1 for softmax).
  Vector mixture_weights(const Vector& h_top) const {
    if (config_.head != OutputHead::kMos) return Vector::Ones(1);
    Matrix g = params_.gate_w * h_top;
    g += params_.gate_b;
    return softmax_columns(g).col(0);
  }

  /// Greedy argmax decoding from SOS until EOS or max_gen_len tokens.
  /// Returns the generated ids (without specials) and whether EOS was hit.
  std::pair<std::vector<int>, bool> greedy(const Vector& cond) const {
    check_cond(cond.size());
    if (!cond.allFinite()) throw DomainError("conditioning vector contains non-finite values");
    const Matrix cond_m(cond);
    State state = initial_state_batch(cond_m);
    std::vector<int> out;
    int prev = Vocabulary::kSos;
    while (true) {
      Matrix x = input_matrix(std::span<const int>(&prev, 1), cond_m);
      Matrix top = advance(x, state, nullptr);
      Vector p = head_probabilities(top).col(0);
      // specials that can never be emitted
      p[Vocabulary::kPad] = -1;
      p[Vocabulary::kSos] = -1;
      Eigen::Index best = 0;
      p.maxCoeff(&best);
      if (best == Vocabulary::kEos) return {out, true};
      if (static_cast<int>(out.size()) == config_.max_gen_len) return {out, false};
      out.push_back(static_cast<int>(best));
      prev = static_cast<int>(best);
    }
  }

  /// Beam search over total log-probability (no length normalization).
  /// Width 1 reproduces greedy(). Ties go to the lexicographically smaller
  /// id sequence so results do not depend on sort stability.
  std::pair<std::vector<int>, bool> beam(const Vector& cond, int width) const {
    if (width < 1) throw ConfigError("beam width must be positive");
    check_cond(cond.size());
    if (!cond.allFinite()) throw DomainError("conditioning vector contains non-finite values");
    struct Hyp {
      std::vector<int> ids;
      double logp = 0.0;
      State state;
      bool terminated = false;
    };
    auto better = [](const Hyp& a, const Hyp& b) { return a.logp != b.logp ? a.logp > b.logp : a.ids < b.ids; };
    const Matrix cond_m(cond);
    std::vector<Hyp> live{Hyp{{}, 0.0, initial_state_batch(cond_m), false}};
    std::vector<Hyp> finished;
    const auto k = static_cast<std::size_t>(width);
    while (!live.empty()) {
      std::vector<Hyp> next;
      for (auto& h : live) {
        const int prev = h.ids.empty() ? Vocabulary::kSos : h.ids.back();
        State state = h.state;
        Matrix x = input_matrix(std::span<const int>(&prev, 1), cond_m);
        Matrix top = advance(x, state, nullptr);
        Vector p = head_probabilities(top).col(0);
        p[Vocabulary::kPad] = -1;
        p[Vocabulary::kSos] = -1;
        std::vector<int> order(static_cast<std::size_t>(p.size()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        const auto take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                          [&](int a, int b) { return p[a] != p[b] ? p[a] > p[b] : a < b; });
        if (static_cast<int>(h.ids.size()) == config_.max_gen_len) {
          // length cap: stop here, terminated only if EOS would have been chosen
          const int best = order[0];
          finished.push_back(Hyp{h.ids, h.logp + std::log(static_cast<double>(p[best])), {}, best == Vocabulary::kEos});
          continue;
        }
        for (std::size_t j = 0; j < take; ++j) {
          const int tok = order[j];
          if (p[tok] <= 0) break;
          const double lp = h.logp + std::log(static_cast<double>(p[tok]));
          if (tok == Vocabulary::kEos) {
            finished.push_back(Hyp{h.ids, lp, {}, true});
          } else {
            auto ids = h.ids;
            ids.push_back(tok);
            next.push_back(Hyp{std::move(ids), lp, state, false});
          }
        }
      }
      std::sort(next.begin(), next.end(), better);
      if (next.size() > k) next.resize(k);
      std::sort(finished.begin(), finished.end(), better);
      if (finished.size() > k) finished.resize(k);
      // scores only fall as hypotheses grow
      if (finished.size() == k && (next.empty() || finished.back().logp >= next.front().logp)) break;
      live = std::move(next);
    }
    return {finished.front().ids, finished.front().terminated};
  }

  /// Mean per-token negative log-likelihood of `sentences` (ids without
  /// specials; SOS is prepended to the inputs and EOS appended to the
  /// targets) under teacher forcing, conditioned column-wise on `conds`
  /// (cond_dim x batch). When `grad` is non-null it receives the gradient of
  /// that mean; it must have this model's parameter shapes.
  Scalar loss_and_gradient(std::span<const std::vector<int>> sentences, const Matrix& conds,
                           Parameters* grad) const;

  Scalar loss(std::span<const std::vector<int>> sentences, const Matrix& conds) const {
    return loss_and_gradient(sentences, conds, nullptr);
  }

 private:
  struct LayerCache {
    Matrix x, h_prev, c_prev, i, f, g, o, tanh_c;
  };

  struct HeadCache {
    Matrix h_top;
    Matrix probs;                 // softmax: vocab x B
    Matrix ctx;                   // mos: K*H x B
    std::vector<Matrix> q;        // mos: per-component vocab x B
    Matrix pi;                    // mos: K x B
    Matrix resp;                  // mos: posterior responsibilities K x B
  };

  void allocate() {
    const int V = config_.vocab_size, H = config_.hidden_dim, d = config_.cond_dim;
    params_ = Parameters{};
    params_.embedding = Matrix::Zero(config_.word_dim, V);
    for (int l = 0; l < config_.num_layers; ++l) {
      const int in = l == 0 ? config_.input_dim() : H;
      params_.w_input.push_back(Matrix::Zero(4 * H, in));
      params_.w_hidden.push_back(Matrix::Zero(4 * H, H));
      params_.bias.push_back(Matrix::Zero(4 * H, 1));
      if (config_.conditioning == Conditioning::kInitState) {
        params_.init_w.push_back(Matrix::Zero(H, d));
        params_.init_b.push_back(Matrix::Zero(H, 1));
      }
    }
    if (config_.head == OutputHead::kMos) {
      const int K = config_.mos_components;
      params_.ctx_w = Matrix::Zero(K * H, H);
      params_.ctx_b = Matrix::Zero(K * H, 1);
      params_.gate_w = Matrix::Zero(K, H);
      params_.gate_b = Matrix::Zero(K, 1);
    }
    params_.out_w = Matrix::Zero(V, H);
    params_.out_b = Matrix::Zero(V, 1);
  }

  void check_cond(Eigen::Index width) const {
    if (width != config_.cond_dim) {
      throw DimensionError("conditioning vector has " + std::to_string(width) + " entries, decoder expects " +
                           std::to_string(config_.cond_dim));
    }
  }

  void check_state(const State& s) const {
    const auto L = static_cast<std::size_t>(config_.num_layers);
    if (s.h.size() != L || s.c.size() != L) throw DimensionError("recurrent state has wrong layer count");
    for (std::size_t l = 0; l < L; ++l) {
      if (s.h[l].rows() != config_.hidden_dim || s.c[l].rows() != config_.hidden_dim ||
          s.h[l].cols() != 1 || s.c[l].cols() != 1) {
        throw DimensionError("recurrent state has wrong shape");
      }
    }
  }

  static Matrix sigmoid(const Matrix& z) {
    return (Scalar(1) + (-z.array()).exp()).inverse().matrix();
  }

  static Matrix log_softmax_columns(const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
      const Scalar m = z.col(b).maxCoeff();
      const Scalar lse = m + std::log((z.col(b).array() - m).exp().sum());
      out.col(b) = z.col(b).array() - lse;
    }
    return out;
  }

  static Matrix softmax_columns(const Matrix& z) { return log_softmax_columns(z).array().exp().matrix(); }

  State initial_state_batch(const Matrix& conds) const {
    const auto B = conds.cols();
    State s;
    for (int l = 0; l < config_.num_layers; ++l) {
      if (config_.conditioning == Conditioning::kInitState) {
        Matrix h = params_.init_w[l] * conds;
        h.colwise() += params_.init_b[l].col(0);
        s.h.push_back(std::move(h));
      } else {
        s.h.push_back(Matrix::Zero(config_.hidden_dim, B));
      }
      s.c.push_back(Matrix::Zero(config_.hidden_dim, B));
    }
    return s;
  }

  Matrix input_matrix(std::span<const int> tokens, const Matrix& conds) const {
    const auto B = static_cast<Eigen::Index>(tokens.size());
    Matrix x(config_.input_dim(), B);
    for (Eigen::Index b = 0; b < B; ++b) {
      x.col(b).head(config_.word_dim) = params_.embedding.col(tokens[static_cast<std::size_t>(b)]);
    }
    if (config_.conditioning == Conditioning::kConcat) x.bottomRows(config_.cond_dim) = conds;
    return x;
  }

  /// Runs every layer for one time step, updating `state`; returns the top
  /// hidden state. Fills `caches` (one per layer) when non-null.
  Matrix advance(Matrix x, State& state, std::vector<LayerCache>* caches) const {
    const int H = config_.hidden_dim;
    for (int l = 0; l < config_.num_layers; ++l) {
      Matrix z = params_.w_input[l] * x;
      z.noalias() += params_.w_hidden[l] * state.h[l];
      z.colwise() += params_.bias[l].col(0);
      Matrix i = sigmoid(z.topRows(H));
      Matrix f = sigmoid(z.middleRows(H, H));
      Matrix g = z.middleRows(2 * H, H).array().tanh().matrix();
      Matrix o = sigmoid(z.bottomRows(H));
      Matrix c = (f.array() * state.c[l].array() + i.array() * g.array()).matrix();
      Matrix tanh_c = c.array().tanh().matrix();
      Matrix h = (o.array() * tanh_c.array()).matrix();
      if (caches) {
        (*caches)[l] = LayerCache{std::move(x), state.h[l], state.c[l], std::move(i), std::move(f), std::move(g),
                                  std::move(o), tanh_c};
      }
      state.h[l] = h;
      state.c[l] = std::move(c);
      x = std::move(h);
    }
    return x;
  }

  Matrix head_probabilities(const Matrix& h_top) const {
    if (config_.head == OutputHead::kSoftmax) {
      Matrix z = params_.out_w * h_top;
      z.colwise() += params_.out_b.col(0);
      return softmax_columns(z);
    }
    HeadCache cache;
    mos_forward(h_top, cache);
    Matrix p = Matrix::Zero(config_.vocab_size, h_top.cols());
    for (int k = 0; k < config_.mos_components; ++k) {
      p += (cache.q[k].array().rowwise() * cache.pi.row(k).array()).matrix();
    }
    return p;
  }

  void mos_forward(const Matrix& h_top, HeadCache& cache) const {
    const int H = config_.hidden_dim, K = config_.mos_components;
    Matrix pre = params_.ctx_w * h_top;
    pre.colwise() += params_.ctx_b.col(0);
    cache.ctx = pre.array().tanh().matrix();
    cache.q.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      Matrix z = params_.out_w * cache.ctx.middleRows(k * H, H);
      z.colwise() += params_.out_b.col(0);
      cache.q[k] = softmax_columns(z);
    }
    Matrix g = params_.gate_w * h_top;
    g.colwise() += params_.gate_b.col(0);
    cache.pi = softmax_columns(g);
  }

  /// Head forward + loss for one time step. Returns the summed masked NLL.
  Scalar head_loss(const Matrix& h_top, std::span<const int> targets, std::span<const Scalar> mask,
                   HeadCache& cache) const;
  /// Accumulates head parameter gradients, returns d loss / d h_top.
  Matrix head_backward(const HeadCache& cache, std::span<const int> targets, std::span<const Scalar> weight,
                       Parameters& grad) const;

  DecoderConfig config_;
  Parameters params_;
};

template <typename Scalar>
Scalar ConditionalLstm<Scalar>::head_loss(const Matrix& h_top, std::span<const int> targets,
                                          std::span<const Scalar> mask, HeadCache& cache) const {
  const auto B = h_top.cols();
  cache.h_top = h_top;
  Scalar total = 0;
  if (config_.head == OutputHead::kSoftmax) {
    Matrix z = params_.out_w * h_top;
    z.colwise() += params_.out_b.col(0);
    Matrix logp = log_softmax_columns(z);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (mask[b] != 0) total -= logp(targets[b], b);
    }
    cache.probs = logp.array().exp().matrix();
    return total;
  }
  const int K = config_.mos_components;
  mos_forward(h_top, cache);
  cache.resp.resize(K, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    if (mask[b] == 0) {
      cache.resp.col(b).setZero();
      continue;
    }
    // log p(y) = logsumexp_k (log pi_k + log q_k[y]) in a stable form
    Vector joint(K);
    for (int k = 0; k < K; ++k) {
      joint[k] = std::log(cache.pi(k, b)) + std::log(cache.q[k](targets[b], b));
    }
    const Scalar m = joint.maxCoeff();
    const Scalar log_p = m + std::log((joint.array() - m).exp().sum());
    cache.resp.col(b) = (joint.array() - log_p).exp().matrix();
    total -= log_p;
  }
  return total;
}

template <typename Scalar>
typename ConditionalLstm<Scalar>::Matrix ConditionalLstm<Scalar>::head_backward(const HeadCache& cache,
                                                                               std::span<const int> targets,
                                                                               std::span<const Scalar> weight,
                                                                               Parameters& grad) const {
  const auto B = cache.h_top.cols();
  const Eigen::Map<const Eigen::Array<Scalar, 1, Eigen::Dynamic>> w(weight.data(), B);
  if (config_.head == OutputHead::kSoftmax) {
    Matrix dz = cache.probs;
    for (Eigen::Index b = 0; b < B; ++b) dz(targets[b], b) -= 1;
    dz = (dz.array().rowwise() * w).matrix();
    grad.out_w.noalias() += dz * cache.h_top.transpose();
    grad.out_b += dz.rowwise().sum();
    return params_.out_w.transpose() * dz;
  }
  const int H = config_.hidden_dim, K = config_.mos_components;
  Matrix dh = Matrix::Zero(H, B);
  for (int k = 0; k < K; ++k) {
    // d/dz_k = r_k (q_k - onehot(y))
    Matrix dz = cache.q[k];
    for (Eigen::Index b = 0; b < B; ++b) dz(targets[b], b) -= 1;
    dz = (dz.array().rowwise() * (w * cache.resp.row(k).array())).matrix();
    const auto ctx_k = cache.ctx.middleRows(k * H, H);
    grad.out_w.noalias() += dz * ctx_k.transpose();
    grad.out_b += dz.rowwise().sum();
    Matrix dpre = ((params_.out_w.transpose() * dz).array() * (Scalar(1) - ctx_k.array().square())).matrix();
    grad.ctx_w.middleRows(k * H, H).noalias() += dpre * cache.h_top.transpose();
    grad.ctx_b.middleRows(k * H, H) += dpre.rowwise().sum();
    dh.noalias() += params_.ctx_w.middleRows(k * H, H).transpose() * dpre;
  }
  // gate logits: d/dg_k = pi_k - r_k
  Matrix dg = ((cache.pi - cache.resp).array().rowwise() * w).matrix();
  grad.gate_w.noalias() += dg * cache.h_top.transpose();
  grad.gate_b += dg.rowwise().sum();
  dh.noalias() += params_.gate_w.transpose() * dg;
  return dh;
}

template <typename Scalar>
Scalar ConditionalLstm<Scalar>::loss_and_gradient(std::span<const std::vector<int>> sentences, const Matrix& conds,
                                                  Parameters* grad) const {
  const auto B = static_cast<Eigen::Index>(sentences.size());
  if (B == 0) throw DomainError("loss over an empty batch");
  if (conds.cols() != B) throw DimensionError("one conditioning vector per sentence required");
  check_cond(conds.rows());

  std::size_t max_len = 0;
  for (const auto& s : sentences) max_len = std::max(max_len, s.size());
  const auto T = max_len + 1;

  // time-major token grids; padding steps carry zero mask
  std::vector<std::vector<int>> inputs(T, std::vector<int>(B, Vocabulary::kPad));
  std::vector<std::vector<int>> targets(T, std::vector<int>(B, Vocabulary::kPad));
  std::vector<std::vector<Scalar>> mask(T, std::vector<Scalar>(B, Scalar(0)));
  Scalar n_tokens = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& s = sentences[static_cast<std::size_t>(b)];
    inputs[0][b] = Vocabulary::kSos;
    for (std::size_t t = 0; t <= s.size(); ++t) {
      const int id = t < s.size() ? s[t] : Vocabulary::kEos;
      if (id < 0 || id >= config_.vocab_size) throw DomainError("token id out of range: " + std::to_string(id));
      targets[t][b] = id;
      mask[t][b] = 1;
      if (t + 1 < T) inputs[t + 1][b] = id;
    }
    n_tokens += static_cast<Scalar>(s.size() + 1);
  }

  State state = initial_state_batch(conds);
  std::vector<std::vector<LayerCache>> layer_caches(T, std::vector<LayerCache>(config_.num_layers));
  std::vector<HeadCache> head_caches(T);
  Scalar total = 0;
  for (std::size_t t = 0; t < T; ++t) {
    Matrix x = input_matrix(inputs[t], conds);
    Matrix top = advance(std::move(x), state, grad ? &layer_caches[t] : nullptr);
    total += head_loss(top, targets[t], mask[t], head_caches[t]);
  }
  const Scalar loss = total / n_tokens;
  if (!grad) return loss;

  const int H = config_.hidden_dim, L = config_.num_layers;
  std::vector<Matrix> dh_next(L, Matrix::Zero(H, B)), dc_next(L, Matrix::Zero(H, B));
  for (std::size_t t = T; t-- > 0;) {
    std::vector<Scalar> weight(mask[t]);
    for (auto& w : weight) w /= n_tokens;
    Matrix from_above = head_backward(head_caches[t], targets[t], weight, *grad);
    for (int l = L - 1; l >= 0; --l) {
      const LayerCache& lc = layer_caches[t][l];
      Matrix dh = dh_next[l] + from_above;
      Matrix dc = (dc_next[l].array() + dh.array() * lc.o.array() * (Scalar(1) - lc.tanh_c.array().square())).matrix();
      Matrix dz(4 * H, B);
      dz.topRows(H) = (dc.array() * lc.g.array() * lc.i.array() * (Scalar(1) - lc.i.array())).matrix();
      dz.middleRows(H, H) = (dc.array() * lc.c_prev.array() * lc.f.array() * (Scalar(1) - lc.f.array())).matrix();
      dz.middleRows(2 * H, H) = (dc.array() * lc.i.array() * (Scalar(1) - lc.g.array().square())).matrix();
      dz.bottomRows(H) = (dh.array() * lc.tanh_c.array() * lc.o.array() * (Scalar(1) - lc.o.array())).matrix();
      grad->w_input[l].noalias() += dz * lc.x.transpose();
      grad->w_hidden[l].noalias() += dz * lc.h_prev.transpose();
      grad->bias[l] += dz.rowwise().sum();
      dh_next[l].noalias() = params_.w_hidden[l].transpose() * dz;
      dc_next[l] = (dc.array() * lc.f.array()).matrix();
      Matrix dx = params_.w_input[l].transpose() * dz;
      if (l > 0) {
        from_above = std::move(dx);
      } else {
        for (Eigen::Index b = 0; b < B; ++b) {
          grad->embedding.col(inputs[t][b]) += dx.col(b).head(config_.word_dim);
        }
      }
    }
  }
  if (config_.conditioning == Conditioning::kInitState) {
    for (int l = 0; l < L; ++l) {
      grad->init_w[l].noalias() += dh_next[l] * conds.transpose();
      grad->init_b[l] += dh_next[l].rowwise().sum();
    }
  }
  return loss;
}

}  // namespace v2s

#endif  // V2S_CONDITIONAL_LSTM_HPP
