#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cmatch/balance.hpp"
#include "cmatch/errors.hpp"

using namespace cmatch;

namespace {

Matching pairs_matching(const std::vector<std::pair<std::string, std::string>>& p) {
  Matching m;
  for (const auto& [e, c] : p) {
    MatchedSet s;
    s.exposed_id = e;
    s.control_ids = {c};
    m.sets.push_back(s);
  }
  return m;
}

}  // namespace

TEST_CASE("equal means give a zero standardized difference") {
  std::vector<double> e = {1.0, 2.0, 3.0};
  std::vector<double> c = {0.0, 2.0, 4.0};
  std::vector<double> w(c.size(), 1.0);
  CHECK(std_diff(e, c, w, pooled_sd(e, c)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("published means and pooled SD reproduce the published value") {
  // Means 0.199 and -0.134 with a pooled SD of 0.8005 standardize to 0.416.
  std::vector<double> e = {0.199};
  std::vector<double> c = {-0.134};
  std::vector<double> w = {1.0};
  double sd = std_diff(e, c, w, 0.8005);
  CHECK(sd == doctest::Approx(0.416).epsilon(1e-3));
  CHECK(sd == doctest::Approx((0.199 + 0.134) / 0.8005).epsilon(1e-12));
}

TEST_CASE("doubling all weights leaves the standardized difference unchanged") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<double> e(15), c(25), w(25), w2(25);
  for (auto& v : e) v = normal(rng) + 0.3;
  for (auto& v : c) v = normal(rng);
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = 0.25 + i % 3;
    w2[i] = 2 * w[i];
  }
  double pooled = pooled_sd(e, c);
  CHECK(std_diff(e, c, w, pooled) ==
        doctest::Approx(std_diff(e, c, w2, pooled)).epsilon(1e-12));
}

TEST_CASE("zero pooled SD yields zero for equal means and infinity otherwise") {
  std::vector<double> e = {1.0, 1.0};
  std::vector<double> c = {1.0, 1.0};
  std::vector<double> w = {1.0, 1.0};
  CHECK(std_diff(e, c, w, 0.0) == 0.0);
  std::vector<double> c2 = {2.0, 2.0};
  CHECK(std::isinf(std_diff(e, c2, w, 0.0)));
}

TEST_CASE("weight validation") {
  std::vector<double> e = {1.0};
  std::vector<double> c = {0.0};
  CHECK_THROWS_AS(std_diff(e, c, {-1.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(std_diff(e, c, {0.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(std_diff(e, c, {1.0, 1.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(std_diff({}, c, {1.0}, 1.0), ConfigError);
}

TEST_CASE("all 1:1 sets reduce the weighted control mean to the plain mean") {
  Matching m = pairs_matching({{"e1", "c1"}, {"e2", "c2"}, {"e3", "c3"}});
  std::map<std::string, double> v = {{"c1", 1.0}, {"c2", 2.0}, {"c3", 6.0}};
  CHECK(weighted_control_mean(m, v) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("mixed set sizes weight controls within their set") {
  Matching m;
  MatchedSet a;
  a.exposed_id = "e1";
  a.control_ids = {"c1", "c2"};
  MatchedSet b;
  b.exposed_id = "e2";
  b.control_ids = {"c3"};
  m.sets = {a, b};
  std::map<std::string, double> v = {{"c1", 0.0}, {"c2", 1.0}, {"c3", 1.0}};
  CHECK(weighted_control_mean(m, v) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("weighted control mean equals a direct per-set averaging oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> size(1, 4);
  Matching m;
  std::map<std::string, double> v;
  double oracle = 0;
  int next = 0;
  const int S = 20;
  for (int s = 0; s < S; ++s) {
    MatchedSet set;
    set.exposed_id = "e" + std::to_string(s);
    int k = size(rng);
    double sum = 0;
    for (int j = 0; j < k; ++j) {
      std::string id = "c" + std::to_string(next++);
      double val = normal(rng);
      v[id] = val;
      sum += val;
      set.control_ids.push_back(id);
    }
    oracle += sum / k;
    m.sets.push_back(set);
  }
  oracle /= S;
  CHECK(weighted_control_mean(m, v) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("equal set sizes collapse to the unweighted control mean") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  Matching m;
  std::map<std::string, double> v;
  double sum = 0;
  int count = 0;
  for (int s = 0; s < 10; ++s) {
    MatchedSet set;
    set.exposed_id = "e" + std::to_string(s);
    for (int j = 0; j < 3; ++j) {
      std::string id = "c" + std::to_string(count);
      double val = normal(rng);
      v[id] = val;
      sum += val;
      ++count;
      set.control_ids.push_back(id);
    }
    m.sets.push_back(set);
  }
  CHECK(weighted_control_mean(m, v) ==
        doctest::Approx(sum / count).epsilon(1e-12));
}

namespace {

Design two_column_design(int n_exposed, int n_control, double shift,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Design d;
  const int n = n_exposed + n_control;
  d.X.resize(n, 2);
  d.columns = {"x1", "x2"};
  for (int i = 0; i < n; ++i) {
    bool exp = i < n_exposed;
    d.row_ids.push_back((exp ? "e" : "c") + std::to_string(i));
    d.exposed.push_back(exp ? 1 : 0);
    d.X(i, 0) = normal(rng) + (exp ? shift : 0.0);
    d.X(i, 1) = normal(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("matching the full population keeps before and after identical") {
  std::mt19937_64 rng(5);
  Design d = two_column_design(10, 10, 0.3, rng);
  Matching m;
  for (int i = 0; i < 10; ++i) {
    MatchedSet s;
    s.exposed_id = d.row_ids[i];
    s.control_ids = {d.row_ids[10 + i]};
    m.sets.push_back(s);
  }
  auto rows = balance_table(m, d);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.exposed_after == doctest::Approx(r.exposed_before).epsilon(1e-12));
    CHECK(r.control_after == doctest::Approx(r.control_before).epsilon(1e-12));
    CHECK(r.std_diff_after == doctest::Approx(r.std_diff_before).epsilon(1e-12));
  }
}

TEST_CASE("a planted half-SD imbalance is flagged before matching") {
  std::mt19937_64 rng(6);
  Design d = two_column_design(200, 200, 0.5, rng);
  Matching m;
  MatchedSet s;
  s.exposed_id = d.row_ids[0];
  s.control_ids = {d.row_ids[200]};
  m.sets.push_back(s);
  auto rows = balance_table(m, d);
  CHECK(rows[0].flag_before);
  CHECK(rows[0].std_diff_before > 0.2);
  CHECK(std::abs(rows[0].std_diff_before - 0.5) < 0.2);
  CHECK_FALSE(rows[1].flag_before);
  for (const auto& r : rows) {
    CHECK(r.flag_before == (std::abs(r.std_diff_before) >= 0.2));
    CHECK(r.flag_after == (std::abs(r.std_diff_after) >= 0.2));
  }
}

TEST_CASE("the after columns honor the matched-set weighting") {
  std::mt19937_64 rng(7);
  Design d = two_column_design(2, 4, 0.0, rng);
  Matching m;
  MatchedSet a;
  a.exposed_id = d.row_ids[0];
  a.control_ids = {d.row_ids[2], d.row_ids[3]};
  MatchedSet b;
  b.exposed_id = d.row_ids[1];
  b.control_ids = {d.row_ids[4]};
  m.sets = {a, b};
  auto rows = balance_table(m, d);
  double want = 0.5 * (0.5 * (d.X(2, 0) + d.X(3, 0))) + 0.5 * d.X(4, 0);
  // control weights 1/2, 1/2, 1 normalize to the per-set average of averages
  CHECK(rows[0].control_after == doctest::Approx(want).epsilon(1e-12));
  CHECK(max_abs_std_diff_after(rows) ==
        doctest::Approx(std::max(std::abs(rows[0].std_diff_after),
                                 std::abs(rows[1].std_diff_after))));
}
