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

#include "v2s/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "v2s/errors.hpp"

namespace v2s {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

bool is_id(const TokenSequence& x, const TokenSequence& y) { return x.tokens == y.tokens; }

bool is_perm(const TokenSequence& x, const TokenSequence& y) {
  if (x.size() != y.size()) return false;
  auto a = x.tokens;
  auto b = y.tokens;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

Rates rates(std::span<const SentencePair> pairs) {
  if (pairs.empty()) throw DomainError("rates: no sentence pairs");
  std::size_t ids = 0, perms = 0;
  for (const auto& p : pairs) {
    ids += is_id(p.x, p.y) ? 1 : 0;
    perms += is_perm(p.x, p.y) ? 1 : 0;
  }
  const auto n = static_cast<double>(pairs.size());
  Rates r{static_cast<double>(ids) / n, static_cast<double>(perms) / n, std::nullopt};
  if (perms > 0) r.id_over_perm = static_cast<double>(ids) / static_cast<double>(perms);
  return r;
}

double bleu(const TokenSequence& x, const TokenSequence& y) {
  if (y.empty()) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (y.size() < n) break;
    const auto hyp = count_ngrams(y.tokens, n);
    const auto ref = count_ngrams(x.tokens, n);
    std::size_t matches = 0;
    for (const auto& [gram, count] : hyp) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    const auto total = y.size() - n + 1;
    double precision = 0.0;
    if (n == 1) {
      if (matches == 0) return 0.0;
      precision = static_cast<double>(matches) / static_cast<double>(total);
    } else {
      precision = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(precision);
    ++orders;
  }
  const double c = static_cast<double>(y.size());
  const double r = static_cast<double>(x.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * brevity * std::exp(log_sum / orders);
}

double avg_bleu(std::span<const SentencePair> pairs) {
  if (pairs.empty()) throw DomainError("avg_bleu: no sentence pairs");
  double sum = 0.0;
  for (const auto& p : pairs) sum += bleu(p.x, p.y);
  return sum / static_cast<double>(pairs.size());
}

MoverResult mover_adapter(const PairScorer& scorer, std::span<const SentencePair> pairs) {
  MoverResult result;
  if (!scorer) return result;
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& p : pairs) {
    try {
      const double s = scorer(p.x.text(), p.y.text());
      if (!std::isfinite(s)) throw DomainError("non-finite score");
      sum += s;
      ++scored;
    } catch (const std::exception& e) {
      ++result.skipped;
      std::cerr << "warning: mover scorer failed on \"" << p.x.text() << "\": " << e.what() << '\n';
    }
  }
  if (scored > 0) result.score = sum / static_cast<double>(scored);
  return result;
}

DiagnosticReport assemble_report(const std::string& encoder_id, std::span<const SentencePair> pairs,
                                 const PairScorer& scorer) {
  const auto r = rates(pairs);
  DiagnosticReport report;
  report.encoder_id = encoder_id;
  report.n_pairs = pairs.size();
  report.id_rate = r.id_rate;
  report.perm_rate = r.perm_rate;
  report.id_over_perm = r.id_over_perm;
  report.bleu = avg_bleu(pairs);
  const auto mover = mover_adapter(scorer, pairs);
  report.mover = mover.score;
  report.mover_skipped = mover.skipped;
  return report;
}

DiagnosticReport diagnose(const DecoderCheckpoint& checkpoint, const Vocabulary& vocab, const Encoder& encoder,
                          std::span<const TokenSequence> eval, std::span<const std::size_t> line_indices,
                          const PairScorer& scorer, std::vector<SentencePair>* pairs_out) {
  checkpoint.check_vocabulary(vocab);
  if (eval.empty()) throw DomainError("diagnose: empty evaluation corpus");
  if (!line_indices.empty() && line_indices.size() != eval.size()) {
    throw DimensionError("diagnose: one line index per evaluation sentence required");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const auto line = line_indices.empty() ? std::optional<std::size_t>{} : line_indices[i];
    const auto emb = encoder.encode(eval[i], line);
    auto result = generate(checkpoint.decoder, vocab, emb.values);
    pairs.push_back(SentencePair{eval[i], std::move(result.output)});
  }
  auto report = assemble_report(encoder.id(), pairs, scorer);
  if (pairs_out) pairs_out->insert(pairs_out->end(), pairs.begin(), pairs.end());
  return report;
}

nlohmann::json to_json(const DiagnosticReport& report) {
  nlohmann::json j;
  j["encoder_id"] = report.encoder_id;
  j["n_pairs"] = report.n_pairs;
  j["id_rate"] = round2(100.0 * report.id_rate);
  j["perm_rate"] = round2(100.0 * report.perm_rate);
  j["id_over_perm"] = report.id_over_perm ? nlohmann::json(round2(100.0 * *report.id_over_perm)) : nlohmann::json(nullptr);
  j["bleu"] = round2(report.bleu);
  if (report.mover) j["mover"] = round2(*report.mover);
  if (report.mover_skipped > 0) j["mover_skipped"] = report.mover_skipped;
  return j;
}

std::vector<SentencePair> read_pairs_jsonl(const std::string& path, const Tokenizer& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pairs file: " + path);
  std::vector<SentencePair> pairs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      pairs.push_back(SentencePair{tokenize(j.at("input").get<std::string>(), tokenizer),
                                   tokenize(j.at("output").get<std::string>(), tokenizer)});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return pairs;
}

void write_pairs_jsonl(const std::string& path, std::span<const SentencePair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write pairs file: " + path);
  for (const auto& p : pairs) out << nlohmann::json{{"input", p.x.text()}, {"output", p.y.text()}}.dump() << '\n';
}

}  // namespace v2s
