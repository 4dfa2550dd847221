#include "cmatch/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmatch/errors.hpp"
#include "cmatch/csv.hpp"
#include "cmatch/stats.hpp"

namespace cmatch {

namespace {

constexpr double kZ975 = 1.959963984540054;
const double kInf = std::numeric_limits<double>::infinity();

double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct CondSet {
  int controls = 0;  // c; set size n = c + 1
  int cases = 0;     // m, with 0 < m < n
  int treated_case = 0;
};

// Per-set conditional likelihood with one treated unit: the case subset
// enumeration collapses to C(c, m-1) subsets containing the treated unit and
// C(c, m) without it.
double case_weight(const CondSet& s, double beta) {
  double b1 = choose(s.controls, s.cases - 1);
  double b0 = choose(s.controls, s.cases);
  double e = std::exp(beta);
  return b1 * e / (b1 * e + b0);
}

std::vector<CondSet> informative_sets(const Matching& matching,
                                      const OutcomeMap& outcome,
                                      int* skipped) {
  std::vector<CondSet> out;
  *skipped = 0;
  for (const auto& set : matching.sets) {
    auto val = [&](const std::string& id) {
      auto it = outcome.find(id);
      if (it == outcome.end())
        throw DataError("conditional_logistic: no outcome for subject " + id);
      double v = it->second;
      if (v != 0.0 && v != 1.0)
        throw DataError("conditional_logistic: outcome not binary for " + id);
      return static_cast<int>(v);
    };
    CondSet cs;
    cs.controls = static_cast<int>(set.control_ids.size());
    cs.treated_case = val(set.exposed_id);
    cs.cases = cs.treated_case;
    for (const auto& c : set.control_ids) cs.cases += val(c);
    int n = cs.controls + 1;
    if (cs.cases == 0 || cs.cases == n || n < 2) {
      ++(*skipped);
      continue;
    }
    out.push_back(cs);
  }
  return out;
}

}  // namespace

CondLogisticSummary conditional_logistic_at(const Matching& matching,
                                            const OutcomeMap& outcome,
                                            double beta) {
  int skipped = 0;
  auto sets = informative_sets(matching, outcome, &skipped);
  CondLogisticSummary s;
  for (const auto& cs : sets) {
    double b1 = choose(cs.controls, cs.cases - 1);
    double b0 = choose(cs.controls, cs.cases);
    double e = std::exp(beta);
    double w = b1 * e / (b1 * e + b0);
    s.loglik += beta * cs.treated_case - std::log(b1 * e + b0);
    s.score += cs.treated_case - w;
    s.information += w * (1 - w);
  }
  return s;
}

EffectEstimate conditional_logistic(const Matching& matching,
                                    const OutcomeMap& outcome) {
  int skipped = 0;
  auto sets = informative_sets(matching, outcome, &skipped);
  EffectEstimate est;
  est.scale = EffectScale::odds_ratio;
  est.n_sets = static_cast<int>(sets.size());
  est.n_skipped_sets = skipped;
  if (sets.empty())
    throw DataError("conditional_logistic: no informative matched sets");

  int treated_cases = 0;
  for (const auto& cs : sets) treated_cases += cs.treated_case;
  bool all_up = treated_cases == static_cast<int>(sets.size());
  bool all_down = treated_cases == 0;

  auto score_info = [&](double beta, double& score, double& info) {
    score = 0;
    info = 0;
    for (const auto& cs : sets) {
      double w = case_weight(cs, beta);
      score += cs.treated_case - w;
      info += w * (1 - w);
    }
  };

  if (!all_up && !all_down) {
    double beta = 0;
    for (int it = 0; it < 100; ++it) {
      double score, info;
      score_info(beta, score, info);
      if (std::abs(score) < 1e-12) break;
      double step = score / std::max(info, 1e-12);
      step = std::clamp(step, -5.0, 5.0);
      beta += step;
    }
    double score, info;
    score_info(beta, score, info);
    double se = 1.0 / std::sqrt(std::max(info, 1e-300));
    est.point = std::exp(beta);
    est.ci_lo = std::exp(beta - kZ975 * se);
    est.ci_hi = std::exp(beta + kZ975 * se);
    double z = beta / se;
    est.p_value = 2 * (1 - normal_cdf(std::abs(z)));
    return est;
  }

  // All informative sets concordant in one direction: the MLE is infinite.
  // Report a median-unbiased fallback (expected treated cases pulled half a
  // count inside the boundary) with a one-sided CI.
  est.infinite_mle = true;
  double target = all_up ? treated_cases - 0.5 : 0.5;
  double lo = -40, hi = 40;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double ew = 0;
    for (const auto& cs : sets) ew += case_weight(cs, mid);
    if (ew < target)
      lo = mid;
    else
      hi = mid;
  }
  double beta = 0.5 * (lo + hi);
  double score, info;
  score_info(beta, score, info);
  double se = 1.0 / std::sqrt(std::max(info, 1e-300));
  est.point = std::exp(beta);
  if (all_up) {
    est.ci_lo = std::exp(beta - 1.644853626951472 * se);
    est.ci_hi = kInf;
  } else {
    est.ci_lo = 0.0;
    est.ci_hi = std::exp(beta + 1.644853626951472 * se);
  }
  // One-sided exact p at beta = 0 for the observed extreme.
  double p = 1.0;
  for (const auto& cs : sets) {
    double w0 = case_weight(cs, 0.0);
    p *= all_up ? w0 : (1 - w0);
  }
  est.p_value = std::min(1.0, 2 * p);
  return est;
}

EffectEstimate fixed_effects_ols(const Matching& matching,
                                 const OutcomeMap& outcome,
                                 double prematch_pooled_sd) {
  EffectEstimate est;
  est.scale = EffectScale::sd_units;
  double sxx = 0, sxy = 0;
  int n = 0, n_sets = 0, skipped = 0;
  std::vector<std::vector<std::pair<double, double>>> sets;  // (x, y)
  for (const auto& set : matching.sets) {
    std::vector<std::pair<double, double>> rows;
    bool ok = true;
    auto push = [&](const std::string& id, double x) {
      auto it = outcome.find(id);
      if (it == outcome.end()) {
        ok = false;
        return;
      }
      rows.push_back({x, it->second});
    };
    push(set.exposed_id, 1.0);
    for (const auto& c : set.control_ids) push(c, 0.0);
    if (!ok || rows.size() < 2) {
      ++skipped;
      continue;
    }
    double xm = 0, ym = 0;
    for (auto& [x, y] : rows) {
      xm += x;
      ym += y;
    }
    xm /= rows.size();
    ym /= rows.size();
    for (auto& [x, y] : rows) {
      sxx += (x - xm) * (x - xm);
      sxy += (x - xm) * (y - ym);
    }
    n += static_cast<int>(rows.size());
    ++n_sets;
    sets.push_back(std::move(rows));
  }
  est.n_sets = n_sets;
  est.n_skipped_sets = skipped;
  if (n_sets == 0 || sxx == 0)
    throw DataError("fixed_effects_ols: no informative matched sets");

  double coef = sxy / sxx;
  double ssr = 0;
  for (const auto& rows : sets) {
    double xm = 0, ym = 0;
    for (const auto& [x, y] : rows) {
      xm += x;
      ym += y;
    }
    xm /= rows.size();
    ym /= rows.size();
    for (const auto& [x, y] : rows) {
      double r = (y - ym) - coef * (x - xm);
      ssr += r * r;
    }
  }
  int df = n - n_sets - 1;
  if (df < 1) throw DataError("fixed_effects_ols: not enough residual df");
  double sigma2 = ssr / df;
  double se = std::sqrt(sigma2 / sxx);
  double tq = student_t_quantile(0.975, df);
  if (prematch_pooled_sd <= 0)
    throw ConfigError("fixed_effects_ols: pre-match pooled SD must be > 0");
  est.point = coef / prematch_pooled_sd;
  est.ci_lo = (coef - tq * se) / prematch_pooled_sd;
  est.ci_hi = (coef + tq * se) / prematch_pooled_sd;
  double t = se > 0 ? coef / se : 0.0;
  est.p_value = 2 * (1 - student_t_cdf(std::abs(t), df));
  return est;
}

std::string classify_effect(const EffectEstimate& est) {
  if (est.scale == EffectScale::odds_ratio) {
    if (est.point <= 0) throw ConfigError("classify_effect: OR must be > 0");
    double r = std::max(est.point, 1.0 / est.point);
    if (r < 1.5) return "below small";
    if (r < 5.0) return "small-to-medium";
    return "large";
  }
  double a = std::abs(est.point);
  if (a < 0.01) return "negligible";
  if (a < 0.2) return "very small";
  if (a < 0.5) return "small";
  if (a < 0.8) return "medium";
  if (a < 1.2) return "large";
  return "very large";
}

OrderedTestResult ordered_test(const EffectEstimate& primary,
                               const std::vector<EffectEstimate>& alternatives,
                               double tau0, double alpha) {
  OrderedTestResult r;
  r.tau0 = tau0;
  r.primary_ci_lo = primary.ci_lo;
  r.primary_ci_hi = primary.ci_hi;
  // Endpoints count as inside: the gate only opens on a strict exclusion.
  r.alternatives_tested = tau0 < primary.ci_lo || tau0 > primary.ci_hi;
  for (const auto& alt : alternatives) {
    std::string decision;
    if (!r.alternatives_tested)
      decision = "unadjusted";
    else
      decision = alt.p_value < alpha ? "rejected" : "not_rejected";
    r.decisions.push_back({to_string(alt.comparison), decision});
  }
  return r;
}

void write_results_csv(const std::vector<EffectEstimate>& estimates,
                       const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  for (const auto& e : estimates) {
    rows.push_back({to_string(e.comparison), e.outcome,
                    e.scale == EffectScale::odds_ratio ? "odds_ratio" : "sd_units",
                    fmt(e.point), fmt(e.ci_lo), fmt(e.ci_hi), fmt(e.p_value),
                    std::to_string(e.n_sets), e.multiplicity_flag,
                    classify_effect(e)});
  }
  write_csv(path,
            {"comparison", "outcome", "scale", "point", "ci_lo", "ci_hi", "p",
             "n_sets", "flag", "effect_size"},
            rows);
}

}  // namespace cmatch
