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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "v2s/analysis.hpp"
#include "v2s/errors.hpp"

namespace {

std::string data_file(const std::string& name) { return std::string(V2S_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("spearman on hand cases") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> rev = {5, 4, 3, 2, 1};
  CHECK(*v2s::spearman(a, a) == doctest::Approx(1.0));
  CHECK(*v2s::spearman(a, rev) == doctest::Approx(-1.0));
  const std::vector<double> tx = {1, 2, 2, 4}, ty = {1, 3, 2, 4};
  CHECK(*v2s::spearman(tx, ty) == doctest::Approx(0.9486832980505138).epsilon(1e-12));
  const std::vector<double> flat = {3, 3, 3, 3};
  CHECK_FALSE(v2s::spearman(flat, ty).has_value());
  CHECK_FALSE(v2s::spearman(std::vector<double>{1}, std::vector<double>{2}).has_value());
  CHECK_THROWS_AS(v2s::spearman(a, tx), v2s::DimensionError);
  // monotone transforms do not change the coefficient
  std::vector<double> cubed;
  for (double v : ty) cubed.push_back(v * v * v + 7);
  CHECK(*v2s::spearman(tx, cubed) == doctest::Approx(*v2s::spearman(tx, ty)));
}

TEST_CASE("spearman matches brute force with ties") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng() % 5);
    for (auto& v : y) v = static_cast<double>(rng() % 5);
    const auto got = v2s::spearman(x, y);
    const auto rx = v2s::testing::brute_force_ranks(x);
    const auto ry = v2s::testing::brute_force_ranks(y);
    const bool degenerate = std::adjacent_find(rx.begin(), rx.end(), std::not_equal_to<>()) == rx.end() ||
                            std::adjacent_find(ry.begin(), ry.end(), std::not_equal_to<>()) == ry.end();
    if (degenerate) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(std::abs(*got - v2s::testing::brute_force_spearman(x, y)) < 1e-9);
    }
  }
}

TEST_CASE("fractional ranks") {
  const std::vector<double> v = {10, 20, 20, 5};
  CHECK(v2s::fractional_ranks(v) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("csv parsing") {
  const auto t = v2s::ScoreTable::parse_csv("task,A,B,C\n#direction: + -\nx,1,2,\ny,3,,4\n");
  CHECK(t.rows == std::vector<std::string>{"x", "y"});
  CHECK(t.cols == std::vector<std::string>{"A", "B", "C"});
  CHECK(t.missing(0, 2));
  CHECK(t.missing(1, 1));
  CHECK_FALSE(t.missing(1, 2));
  CHECK(t.higher_is_better == std::vector<bool>{true, false});
  CHECK(*t.row_index("y") == 1);
  CHECK_FALSE(t.col_index("Z").has_value());

  const auto back = v2s::ScoreTable::parse_csv(t.to_csv());
  CHECK(back.rows == t.rows);
  CHECK(back.higher_is_better == t.higher_is_better);
  CHECK(back.values(1, 2) == 4);

  CHECK_THROWS_AS(v2s::ScoreTable::parse_csv("task,A\nx,1,2\n"), v2s::FormatError);
  CHECK_THROWS_AS(v2s::ScoreTable::parse_csv("task,A\nx,abc\n"), v2s::FormatError);
  CHECK_THROWS_AS(v2s::ScoreTable::parse_csv("task,A\n#direction: + +\nx,1\n"), v2s::FormatError);
  CHECK_THROWS_AS(v2s::ScoreTable::load_csv("/nonexistent/table.csv"), v2s::IoError);
}

TEST_CASE("ranking a single row") {
  const auto t = v2s::ScoreTable::load_csv(data_file("metrics.csv"));
  const auto id = v2s::rank_encoders(t, "Id");
  REQUIRE(id.size() == 9);
  std::vector<std::string> order;
  for (const auto& e : id) order.push_back(e.encoder);
  CHECK(order == std::vector<std::string>{"InferSent", "QuickThought", "LASER", "Avg+Max+Hier", "Avg", "Hier", "SBERT",
                                          "Sent2Vec", "GEM"});
  CHECK(id[0].rank == 1.0);
  CHECK_THROWS_AS(v2s::rank_encoders(t, "Nope"), v2s::LookupError);

  const auto lower = v2s::ScoreTable::parse_csv("task,A,B,C\n#direction: -\nerr,0.3,0.1,0.2\n");
  const auto r = v2s::rank_encoders(lower, "err");
  CHECK(r[0].encoder == "B");
  CHECK(r[2].encoder == "A");
}

TEST_CASE("average rank over the downstream table") {
  const auto t = v2s::ScoreTable::load_csv(data_file("downstream.csv"));
  std::vector<std::string> excluded;
  const auto avg = v2s::average_rank(t, &excluded);
  CHECK(excluded == std::vector<std::string>{"LASER"});
  // frozen from the independent python oracle
  const std::vector<std::pair<std::string, double>> expected = {
      {"SBERT", 1.9285714285714286},       {"QuickThought", 2.0},      {"InferSent", 2.142857142857143},
      {"Sent2Vec", 4.821428571428571},     {"Avg+Max+Hier", 4.964285714285714}, {"Avg", 5.571428571428571},
      {"Hier", 6.857142857142857},         {"GEM", 7.714285714285714}};
  REQUIRE(avg.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(avg[i].encoder == expected[i].first);
    CHECK(avg[i].score == doctest::Approx(expected[i].second).epsilon(1e-12));
  }
  const auto rounded = v2s::rounded_ranks(avg);
  CHECK(rounded.at("SBERT") == 1);
  CHECK(rounded.at("GEM") == 8);
}

TEST_CASE("correlation matrix") {
  const auto diag = v2s::ScoreTable::parse_csv("task,A,B,C,D\nup,1,2,3,4\ndown,4,3,2,1\nflat,1,1,1,1\n");
  const auto tasks = v2s::ScoreTable::parse_csv("task,A,B,C,D,E\n#direction: + -\nt1,10,20,30,40,50\nerr,4,3,2,,0\n");
  const auto m = v2s::correlation_matrix(diag, tasks);
  CHECK(m.diagnostics == std::vector<std::string>{"up", "down", "flat"});
  CHECK(m.rho(0, 0) == doctest::Approx(1.0));
  CHECK(m.rho(1, 0) == doctest::Approx(-1.0));
  CHECK(std::isnan(m.rho(2, 0)));
  // lower-is-better task is negated; D is missing there so only A,B,C count
  CHECK(m.rho(0, 1) == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < m.rho.size(); ++i) {
    if (!std::isnan(m.rho(i))) CHECK(std::abs(m.rho(i)) <= 1.0);
  }
  const auto s = v2s::summarize(m, "up");
  CHECK(s.mean_rho == doctest::Approx(1.0));
  CHECK(s.min_rho == doctest::Approx(1.0));
  CHECK_THROWS_AS(v2s::summarize(m, "nope"), v2s::LookupError);
  CHECK(v2s::summary_json(m).contains("up"));

  const auto few = v2s::ScoreTable::parse_csv("task,A,B\nx,1,2\n");
  CHECK_THROWS_AS(v2s::correlation_matrix(few, few), v2s::DomainError);

  v2s::testing::TempDir dir;
  m.save_csv(dir.file("corr.csv"));
  const auto text = v2s::testing::read_file(dir.file("corr.csv"));
  CHECK(text.find("up") != std::string::npos);
}

TEST_CASE("bundled tables correlate within range") {
  const auto diag = v2s::ScoreTable::load_csv(data_file("metrics.csv"));
  const auto tasks = v2s::ScoreTable::load_csv(data_file("downstream.csv"));
  const auto m = v2s::correlation_matrix(diag, tasks);
  CHECK(m.rho.rows() == 5);
  CHECK(m.rho.cols() == 14);
  for (Eigen::Index i = 0; i < m.rho.size(); ++i) {
    if (!std::isnan(m.rho(i))) CHECK(std::abs(m.rho(i)) <= 1.0);
  }
}
