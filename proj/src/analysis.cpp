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

#include "v2s/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "v2s/errors.hpp"

namespace v2s {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Ranking rank_values(const std::vector<std::string>& names, const std::vector<double>& scores, bool descending) {
  std::vector<double> keys(scores);
  if (descending) {
    for (auto& k : keys) k = -k;
  }
  const auto ranks = fractional_ranks(keys);
  Ranking out;
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back(RankEntry{names[i], ranks[i], scores[i]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<std::size_t> ScoreTable::row_index(const std::string& name) const {
  const auto it = std::find(rows.begin(), rows.end(), name);
  if (it == rows.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

std::optional<std::size_t> ScoreTable::col_index(const std::string& name) const {
  const auto it = std::find(cols.begin(), cols.end(), name);
  if (it == cols.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cols.begin());
}

bool ScoreTable::missing(std::size_t r, std::size_t c) const {
  return std::isnan(values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
}

void ScoreTable::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(rows.size()) ||
      values.cols() != static_cast<Eigen::Index>(cols.size())) {
    throw FormatError("score table shape does not match its row and column names");
  }
  if (higher_is_better.size() != rows.size()) throw FormatError("score table needs one direction per row");
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (std::isinf(values(r, c))) throw FormatError("score table contains an infinite value");
    }
  }
}

ScoreTable ScoreTable::parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  ScoreTable table;
  std::vector<std::vector<double>> data;
  std::vector<std::string> directions;
  bool have_header = false;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto where = source + ":" + std::to_string(n);
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      static constexpr std::string_view kDirection = "#direction:";
      if (t.rfind(kDirection, 0) == 0) {
        std::string rest = t.substr(kDirection.size());
        std::replace(rest.begin(), rest.end(), ',', ' ');
        std::istringstream ds(rest);
        for (std::string d; ds >> d;) directions.push_back(d);
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells.size() < 2) throw FormatError(where + ": header needs at least one encoder column");
      table.cols.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() > table.cols.size() + 1) throw FormatError(where + ": too many cells");
    cells.resize(table.cols.size() + 1);
    table.rows.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.push_back(kMissing);
        continue;
      }
      double v = 0.0;
      const auto* first = cells[c].data();
      const auto* last = first + cells[c].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw FormatError(where + ": bad number '" + cells[c] + "'");
      }
      row.push_back(v);
    }
    data.push_back(std::move(row));
  }
  if (!have_header) throw FormatError(source + ": empty score table");
  table.values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(table.cols.size()));
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r][c];
    }
  }
  if (directions.empty()) {
    table.higher_is_better.assign(table.rows.size(), true);
  } else {
    if (directions.size() != table.rows.size()) {
      throw FormatError(source + ": #direction lists " + std::to_string(directions.size()) + " entries for " +
                        std::to_string(table.rows.size()) + " rows");
    }
    for (const auto& d : directions) {
      if (d == "+") {
        table.higher_is_better.push_back(true);
      } else if (d == "-" || d == "−") {
        table.higher_is_better.push_back(false);
      } else {
        throw FormatError(source + ": bad direction '" + d + "'");
      }
    }
  }
  table.validate();
  return table;
}

ScoreTable ScoreTable::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score table: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string ScoreTable::to_csv() const {
  std::ostringstream out;
  if (std::find(higher_is_better.begin(), higher_is_better.end(), false) != higher_is_better.end()) {
    out << "#direction:";
    for (bool h : higher_is_better) out << ' ' << (h ? '+' : '-');
    out << '\n';
  }
  out << "task";
  for (const auto& c : cols) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << csv_escape(rows[r]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out << ',' << format_number(values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out << '\n';
  }
  return out.str();
}

void ScoreTable::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write score table: " + path);
  out << to_csv();
}

// ---------------------------------------------------------------------------

std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DimensionError("spearman: inputs differ in length");
  if (xs.size() < 2) return std::nullopt;
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const auto n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Ranking rank_encoders(const ScoreTable& table, const std::string& row) {
  const auto r = table.row_index(row);
  if (!r) throw LookupError("no row named '" + row + "' in score table");
  std::vector<std::string> names;
  std::vector<double> scores;
  for (std::size_t c = 0; c < table.cols.size(); ++c) {
    if (table.missing(*r, c)) continue;
    names.push_back(table.cols[c]);
    scores.push_back(table.values(static_cast<Eigen::Index>(*r), static_cast<Eigen::Index>(c)));
  }
  return rank_values(names, scores, table.higher_is_better[*r]);
}

Ranking average_rank(const ScoreTable& table, std::vector<std::string>* excluded) {
  if (table.rows.empty() || table.cols.empty()) throw DomainError("average_rank: empty score table");
  std::vector<double> sum(table.cols.size(), 0.0);
  std::vector<std::size_t> count(table.cols.size(), 0);
  for (const auto& row : table.rows) {
    for (const auto& entry : rank_encoders(table, row)) {
      const auto c = *table.col_index(entry.encoder);
      sum[c] += entry.rank;
      ++count[c];
    }
  }
  std::vector<std::string> names;
  std::vector<double> means;
  for (std::size_t c = 0; c < table.cols.size(); ++c) {
    if (count[c] == 0) {
      std::cerr << "warning: encoder '" << table.cols[c] << "' has no scores; excluded from average rank\n";
      if (excluded) excluded->push_back(table.cols[c]);
      continue;
    }
    names.push_back(table.cols[c]);
    means.push_back(sum[c] / static_cast<double>(count[c]));
  }
  return rank_values(names, means, false);
}

std::map<std::string, int> rounded_ranks(const Ranking& ranking) {
  std::map<std::string, int> out;
  for (const auto& e : ranking) out[e.encoder] = static_cast<int>(std::floor(e.rank + 0.5));
  return out;
}

// ---------------------------------------------------------------------------

std::string CorrelationMatrix::to_csv() const {
  std::ostringstream out;
  out << "diagnostic";
  for (const auto& t : tasks) out << ',' << csv_escape(t);
  out << '\n';
  for (std::size_t r = 0; r < diagnostics.size(); ++r) {
    out << csv_escape(diagnostics[r]);
    for (std::size_t c = 0; c < tasks.size(); ++c) {
      out << ',' << format_number(rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out << '\n';
  }
  return out.str();
}

void CorrelationMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write correlation matrix: " + path);
  out << to_csv();
}

CorrelationMatrix correlation_matrix(const ScoreTable& diagnostics, const ScoreTable& downstream) {
  std::vector<std::pair<std::size_t, std::size_t>> shared;  // (diag col, down col)
  for (std::size_t c = 0; c < diagnostics.cols.size(); ++c) {
    if (const auto d = downstream.col_index(diagnostics.cols[c])) shared.emplace_back(c, *d);
  }
  if (shared.size() < 3) {
    throw DomainError("correlation needs at least 3 shared encoders, found " + std::to_string(shared.size()));
  }
  CorrelationMatrix m;
  m.diagnostics = diagnostics.rows;
  m.tasks = downstream.rows;
  m.rho = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m.diagnostics.size()),
                                    static_cast<Eigen::Index>(m.tasks.size()), kMissing);
  for (std::size_t r = 0; r < diagnostics.rows.size(); ++r) {
    const double sr = diagnostics.higher_is_better[r] ? 1.0 : -1.0;
    for (std::size_t t = 0; t < downstream.rows.size(); ++t) {
      const double st = downstream.higher_is_better[t] ? 1.0 : -1.0;
      std::vector<double> xs, ys;
      for (const auto& [dc, tc] : shared) {
        if (diagnostics.missing(r, dc) || downstream.missing(t, tc)) continue;
        xs.push_back(sr * diagnostics.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(dc)));
        ys.push_back(st * downstream.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(tc)));
      }
      if (const auto rho = spearman(xs, ys)) {
        m.rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = *rho;
      }
    }
  }
  return m;
}

CorrelationSummary summarize(const CorrelationMatrix& matrix, const std::string& diagnostic) {
  const auto it = std::find(matrix.diagnostics.begin(), matrix.diagnostics.end(), diagnostic);
  if (it == matrix.diagnostics.end()) throw LookupError("no diagnostic named '" + diagnostic + "'");
  const auto r = static_cast<Eigen::Index>(it - matrix.diagnostics.begin());
  double sum = 0.0, min = std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (Eigen::Index c = 0; c < matrix.rho.cols(); ++c) {
    const double v = matrix.rho(r, c);
    if (std::isnan(v)) continue;
    sum += v;
    min = std::min(min, v);
    ++n;
  }
  if (n == 0) throw DomainError("diagnostic '" + diagnostic + "' has no defined correlations");
  return {sum / static_cast<double>(n), min};
}

nlohmann::json summary_json(const CorrelationMatrix& matrix) {
  auto out = nlohmann::json::object();
  for (const auto& d : matrix.diagnostics) {
    try {
      const auto s = summarize(matrix, d);
      out[d] = {{"mean", s.mean_rho}, {"min", s.min_rho}};
    } catch (const DomainError&) {
      out[d] = nullptr;
    }
  }
  return out;
}

std::map<std::string, std::optional<double>> cross_table_spearman(const ScoreTable& a, const ScoreTable& b) {
  std::map<std::string, std::optional<double>> out;
  for (std::size_t ra = 0; ra < a.rows.size(); ++ra) {
    const auto rb = b.row_index(a.rows[ra]);
    if (!rb) continue;
    std::vector<double> xs, ys;
    for (std::size_t ca = 0; ca < a.cols.size(); ++ca) {
      const auto cb = b.col_index(a.cols[ca]);
      if (!cb || a.missing(ra, ca) || b.missing(*rb, *cb)) continue;
      xs.push_back(a.values(static_cast<Eigen::Index>(ra), static_cast<Eigen::Index>(ca)));
      ys.push_back(b.values(static_cast<Eigen::Index>(*rb), static_cast<Eigen::Index>(*cb)));
    }
    out[a.rows[ra]] = spearman(xs, ys);
  }
  return out;
}

}  // namespace v2s
