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

#ifndef V2S_ANALYSIS_HPP
#define V2S_ANALYSIS_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace v2s {

/// A (task x encoder) matrix of scores. Missing cells hold NaN.
struct ScoreTable {
  std::vector<std::string> rows;  // task or diagnostic names
  std::vector<std::string> cols;  // encoder ids
  Eigen::MatrixXd values;
  std::vector<bool> higher_is_better;  // per row

  std::optional<std::size_t> row_index(const std::string& name) const;
  std::optional<std::size_t> col_index(const std::string& name) const;
  bool missing(std::size_t r, std::size_t c) const;

  /// Throws FormatError on shape or direction inconsistencies and on
  /// non-finite present values.
  void validate() const;

  /// CSV with a header row of encoder ids and the task name in the first
  /// column; empty cells are missing. An optional "#direction:" comment line
  /// lists one "+" or "-" per task row, in row order.
  static ScoreTable load_csv(const std::string& path);
  static ScoreTable parse_csv(const std::string& text, const std::string& source = "<string>");
  std::string to_csv() const;
  void save_csv(const std::string& path) const;
};

/// Spearman rank correlation: Pearson correlation of fractional (average
/// tie) ranks. Absent for fewer than two points or zero rank variance.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

/// 1-based ascending ranks with ties sharing their average rank.
std::vector<double> fractional_ranks(std::span<const double> values);

struct RankEntry {
  std::string encoder;
  double rank = 0.0;   // 1 = best, fractional on ties
  double score = 0.0;  // the ranked quantity (table value, or mean rank)
};

/// Encoders ordered from best to worst; ties keep table column order.
using Ranking = std::vector<RankEntry>;

/// Ranks the encoders on one row; encoders missing that row are left out.
Ranking rank_encoders(const ScoreTable& table, const std::string& row);

/// Mean of per-row ranks (each row ranked over its present encoders), then
/// ranked ascending. Encoders with no values at all are excluded and named
/// in `excluded` when non-null.
Ranking average_rank(const ScoreTable& table, std::vector<std::string>* excluded = nullptr);

/// Integer view of a ranking (rank rounded half up), for comparing against
/// published integer ranks.
std::map<std::string, int> rounded_ranks(const Ranking& ranking);

struct CorrelationMatrix {
  std::vector<std::string> diagnostics;
  std::vector<std::string> tasks;
  Eigen::MatrixXd rho;  // diagnostics x tasks, NaN where undefined

  std::string to_csv() const;
  void save_csv(const std::string& path) const;
};

/// Spearman between every diagnostic row and every downstream row over the
/// encoders both tables share, with pairwise deletion of missing cells.
/// Rows flagged lower-is-better are negated first. Throws DomainError with
/// fewer than three shared encoders.
CorrelationMatrix correlation_matrix(const ScoreTable& diagnostics, const ScoreTable& downstream);

struct CorrelationSummary {
  double mean_rho = 0.0;
  double min_rho = 0.0;
};

CorrelationSummary summarize(const CorrelationMatrix& matrix, const std::string& diagnostic);

/// {"<diagnostic>": {"mean": .., "min": ..}} for every diagnostic with at
/// least one defined entry.
nlohmann::json summary_json(const CorrelationMatrix& matrix);

/// For every row present in both tables, Spearman over the shared encoders.
/// Used to compare diagnostics across decoder variants.
std::map<std::string, std::optional<double>> cross_table_spearman(const ScoreTable& a, const ScoreTable& b);

}  // namespace v2s

#endif  // V2S_ANALYSIS_HPP
