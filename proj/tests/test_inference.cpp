#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cmatch/errors.hpp"
#include "cmatch/inference.hpp"

using namespace cmatch;

namespace {

double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// d1 pairs where only the exposed subject is a case, d0 where only the
// control is, plus concordant padding.
Matching discordant_pairs(int d1, int d0, int concordant, OutcomeMap& y) {
  Matching m;
  int next = 0;
  auto add_pair = [&](double ye, double yc) {
    MatchedSet s;
    s.exposed_id = "e" + std::to_string(next);
    s.control_ids = {"c" + std::to_string(next)};
    y[s.exposed_id] = ye;
    y[s.control_ids[0]] = yc;
    m.sets.push_back(s);
    ++next;
  };
  for (int i = 0; i < d1; ++i) add_pair(1, 0);
  for (int i = 0; i < d0; ++i) add_pair(0, 1);
  for (int i = 0; i < concordant; ++i) add_pair(i % 2, i % 2);
  return m;
}

Matching random_sets(std::mt19937_64& rng, int n_sets, OutcomeMap& y,
                     double p_case) {
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> unif;
  Matching m;
  int next = 0;
  for (int s = 0; s < n_sets; ++s) {
    MatchedSet set;
    set.exposed_id = "e" + std::to_string(s);
    y[set.exposed_id] = unif(rng) < p_case ? 1.0 : 0.0;
    int k = size(rng);
    for (int j = 0; j < k; ++j) {
      std::string id = "c" + std::to_string(next++);
      y[id] = unif(rng) < p_case ? 1.0 : 0.0;
      set.control_ids.push_back(id);
    }
    m.sets.push_back(set);
  }
  return m;
}

}  // namespace

TEST_CASE("pair odds ratio equals the discordant-pair ratio") {
  OutcomeMap y;
  Matching m = discordant_pairs(30, 15, 10, y);
  EffectEstimate est = conditional_logistic(m, y);
  CHECK(est.point == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(est.n_sets == 45);
  CHECK(est.n_skipped_sets == 10);
  CHECK(est.ci_lo <= est.point);
  CHECK(est.point <= est.ci_hi);
}

TEST_CASE("pair MLE matches the closed form on random discordant counts") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cnt(1, 40);
  for (int rep = 0; rep < 50; ++rep) {
    int d1 = cnt(rng), d0 = cnt(rng);
    OutcomeMap y;
    Matching m = discordant_pairs(d1, d0, rep % 4, y);
    EffectEstimate est = conditional_logistic(m, y);
    CHECK(std::abs((std::log(est.point)) - (std::log(static_cast<double>(d1) / d0))) <= 1e-8);
  }
}

TEST_CASE("a 1:2 set with the exposed subject as sole case has the textbook term") {
  OutcomeMap y = {{"e0", 1.0}, {"c0", 0.0}, {"c1", 0.0}};
  Matching m;
  MatchedSet s;
  s.exposed_id = "e0";
  s.control_ids = {"c0", "c1"};
  m.sets.push_back(s);
  for (double beta : {-1.0, 0.0, 0.7, 2.0}) {
    CondLogisticSummary sum = conditional_logistic_at(m, y, beta);
    double expected = beta - std::log(std::exp(beta) + 2.0);
    CHECK(sum.loglik == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("null likelihood and score match the hypergeometric identities") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    OutcomeMap y;
    Matching m = random_sets(rng, 25, y, 0.4);
    CondLogisticSummary at0 = conditional_logistic_at(m, y, 0.0);

    double loglik = 0, score = 0;
    for (const auto& set : m.sets) {
      int n = 1 + static_cast<int>(set.control_ids.size());
      int a = static_cast<int>(y.at(set.exposed_id));
      int cases = a;
      for (const auto& c : set.control_ids) cases += static_cast<int>(y.at(c));
      if (cases == 0 || cases == n) continue;  // uninformative
      loglik += std::log(1.0 / choose(n, cases));
      score += a - static_cast<double>(cases) / n;
    }
    CHECK(std::abs((at0.loglik) - (loglik)) <= 1e-10);
    CHECK(std::abs((at0.score) - (score)) <= 1e-10);
  }
}

TEST_CASE("the Newton solution zeroes the conditional score") {
  std::mt19937_64 rng(3);
  OutcomeMap y;
  Matching m = random_sets(rng, 40, y, 0.45);
  EffectEstimate est = conditional_logistic(m, y);
  CondLogisticSummary at = conditional_logistic_at(m, y, std::log(est.point));
  CHECK(std::abs(at.score) < 1e-8);
}

TEST_CASE("one-directional concordance triggers the flagged fallback") {
  OutcomeMap y;
  Matching m = discordant_pairs(12, 0, 5, y);
  EffectEstimate est = conditional_logistic(m, y);
  CHECK(est.infinite_mle);
  CHECK(std::isinf(est.ci_hi));
  CHECK(est.ci_lo > 0);
  CHECK(est.p_value < 0.05);
}

TEST_CASE("all-concordant matchings carry no information") {
  OutcomeMap y;
  Matching m = discordant_pairs(0, 0, 8, y);
  CHECK_THROWS_AS(conditional_logistic(m, y), DataError);
}

TEST_CASE("constant within-pair differences are recovered exactly") {
  OutcomeMap y;
  Matching m;
  const double delta = 1.7;
  for (int s = 0; s < 6; ++s) {
    MatchedSet set;
    set.exposed_id = "e" + std::to_string(s);
    set.control_ids = {"c" + std::to_string(s)};
    y[set.exposed_id] = 3.0 * s + delta;
    y[set.control_ids[0]] = 3.0 * s;
    m.sets.push_back(set);
  }
  EffectEstimate est = fixed_effects_ols(m, y, 1.0);
  CHECK(est.point == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("a single set reduces to the within-set mean difference") {
  OutcomeMap y = {{"e0", 4.0}, {"c0", 1.0}, {"c1", 3.0}};
  Matching m;
  MatchedSet s;
  s.exposed_id = "e0";
  s.control_ids = {"c0", "c1"};
  m.sets.push_back(s);
  EffectEstimate est = fixed_effects_ols(m, y, 1.0);
  CHECK(est.point == doctest::Approx(4.0 - 2.0).epsilon(1e-12));
}

TEST_CASE("within-set demeaning equals the dummy-variable regression") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> size(1, 4);
  for (int rep = 0; rep < 25; ++rep) {
    OutcomeMap y;
    Matching m;
    std::vector<double> ys;
    std::vector<int> set_of, treat;
    int next = 0;
    const int S = 3 + rep % 6;
    for (int s = 0; s < S; ++s) {
      MatchedSet set;
      set.exposed_id = "e" + std::to_string(s);
      double ye = normal(rng) + 0.4;
      y[set.exposed_id] = ye;
      ys.push_back(ye);
      set_of.push_back(s);
      treat.push_back(1);
      int k = size(rng);
      for (int j = 0; j < k; ++j) {
        std::string id = "c" + std::to_string(next++);
        double yc = normal(rng);
        y[id] = yc;
        ys.push_back(yc);
        set_of.push_back(s);
        treat.push_back(0);
        set.control_ids.push_back(id);
      }
      m.sets.push_back(set);
    }
    const int n = static_cast<int>(ys.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 1 + S);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = treat[i];
      X(i, 1 + set_of[i]) = 1.0;
      Y[i] = ys[i];
    }
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
    double ssr = (Y - X * beta).squaredNorm();
    int df = n - S - 1;
    Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(1 + S, 1 + S));
    double se = std::sqrt(ssr / df * xtx_inv(0, 0));

    const double sd = 2.0;  // report in halves of an outcome SD
    EffectEstimate est = fixed_effects_ols(m, y, sd);
    CHECK(std::abs((est.point * sd) - (beta[0])) <= 1e-8);
    double half = (est.ci_hi - est.ci_lo) / 2.0 * sd;
    CHECK(std::abs((est.point * sd - half) - (est.ci_lo * sd)) <= 1e-8);
    // CI half-width implied by the oracle standard error.
    CHECK(std::abs((est.ci_hi * sd - beta[0]) / se -
                   ((est.ci_hi - est.point) * sd) / se) < 1e-8);
  }
}

TEST_CASE("adding per-set constants does not move the estimate") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  OutcomeMap y;
  Matching m;
  for (int s = 0; s < 8; ++s) {
    MatchedSet set;
    set.exposed_id = "e" + std::to_string(s);
    y[set.exposed_id] = normal(rng) + 0.3;
    for (int j = 0; j < 2; ++j) {
      std::string id = "c" + std::to_string(2 * s + j);
      y[id] = normal(rng);
      set.control_ids.push_back(id);
    }
    m.sets.push_back(set);
  }
  EffectEstimate a = fixed_effects_ols(m, y, 1.0);
  OutcomeMap y2 = y;
  for (size_t s = 0; s < m.sets.size(); ++s) {
    double shift = 100.0 * (s + 1);
    y2[m.sets[s].exposed_id] += shift;
    for (const auto& c : m.sets[s].control_ids) y2[c] += shift;
  }
  EffectEstimate b = fixed_effects_ols(m, y2, 1.0);
  CHECK(std::abs((a.point) - (b.point)) <= 1e-10);
  CHECK(std::abs((a.ci_lo) - (b.ci_lo)) <= 1e-9);
}

TEST_CASE("effect sizes classify by magnitude with reciprocal symmetry") {
  auto or_est = [](double v) {
    EffectEstimate e;
    e.scale = EffectScale::odds_ratio;
    e.point = v;
    return e;
  };
  CHECK(classify_effect(or_est(2.0)) == "small-to-medium");
  CHECK(classify_effect(or_est(0.5)) == "small-to-medium");
  CHECK(classify_effect(or_est(1.2)) == "below small");
  CHECK(classify_effect(or_est(6.0)) == "large");
  CHECK(classify_effect(or_est(5.0)) == "large");
  CHECK(classify_effect(or_est(1.5)) == "small-to-medium");
  CHECK_THROWS_AS(classify_effect(or_est(0.0)), ConfigError);

  auto sd_est = [](double v) {
    EffectEstimate e;
    e.scale = EffectScale::sd_units;
    e.point = v;
    return e;
  };
  CHECK(classify_effect(sd_est(0.6)) == "medium");
  CHECK(classify_effect(sd_est(-0.6)) == "medium");
  CHECK(classify_effect(sd_est(0.005)) == "negligible");
  CHECK(classify_effect(sd_est(0.1)) == "very small");
  CHECK(classify_effect(sd_est(0.3)) == "small");
  CHECK(classify_effect(sd_est(1.0)) == "large");
  CHECK(classify_effect(sd_est(1.5)) == "very large");
}

TEST_CASE("the gate stays closed when the null sits in the primary interval") {
  EffectEstimate primary;
  primary.ci_lo = 0.9;
  primary.ci_hi = 1.4;
  EffectEstimate alt;
  alt.comparison = Comparison::fb_sc;
  alt.p_value = 0.01;
  OrderedTestResult r = ordered_test(primary, {alt}, 1.0);
  CHECK_FALSE(r.alternatives_tested);
  REQUIRE(r.decisions.size() == 1);
  CHECK(r.decisions[0].second == "unadjusted");
}

TEST_CASE("the gate opens when the null is excluded") {
  EffectEstimate primary;
  primary.ci_lo = 1.2;
  primary.ci_hi = 1.9;
  EffectEstimate alt1;
  alt1.comparison = Comparison::fb_sc;
  alt1.p_value = 0.01;
  EffectEstimate alt2;
  alt2.comparison = Comparison::fb_nsc;
  alt2.p_value = 0.20;
  OrderedTestResult r = ordered_test(primary, {alt1, alt2}, 1.0);
  CHECK(r.alternatives_tested);
  CHECK(r.decisions[0].second == "rejected");
  CHECK(r.decisions[1].second == "not_rejected");
}

TEST_CASE("a null on the interval endpoint counts as inside") {
  EffectEstimate primary;
  primary.ci_lo = 1.0;
  primary.ci_hi = 1.9;
  OrderedTestResult r = ordered_test(primary, {}, 1.0);
  CHECK_FALSE(r.alternatives_tested);
}
