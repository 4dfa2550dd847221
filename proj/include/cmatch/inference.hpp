#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmatch/matcher.hpp"

namespace cmatch {

enum class EffectScale { odds_ratio, sd_units };

struct EffectEstimate {
  Comparison comparison = Comparison::fb_ac;
  std::string outcome;
  EffectScale scale = EffectScale::odds_ratio;
  double point = 0.0;   // OR or SD-units mean difference
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
  int n_sets = 0;          // informative sets
  int n_skipped_sets = 0;  // concordant/zero-information sets
  bool infinite_mle = false;  // median-unbiased fallback in use
  std::string multiplicity_flag = "unadjusted";
};

// Outcome value per subject id; every matched subject must be present.
using OutcomeMap = std::map<std::string, double>;

// Exact conditional likelihood with the treatment indicator as the sole
// predictor, maximized by Newton iteration; Wald 95% CI on the OR scale.
EffectEstimate conditional_logistic(const Matching& matching,
                                    const OutcomeMap& outcome);

// Per-set intercepts absorbed by within-set demeaning; effect reported in SD
// units of the pre-match outcome (pass the pre-match pooled SD).
EffectEstimate fixed_effects_ols(const Matching& matching,
                                 const OutcomeMap& outcome,
                                 double prematch_pooled_sd);

std::string classify_effect(const EffectEstimate& estimate);

struct OrderedTestResult {
  double tau0 = 0.0;
  double primary_ci_lo = 0.0, primary_ci_hi = 0.0;
  bool alternatives_tested = false;
  // comparison name -> "rejected"/"not_rejected"/"unadjusted"
  std::vector<std::pair<std::string, std::string>> decisions;
};

// Gatekeeping: alternatives are formally tested only when tau0 falls outside
// the primary CI (endpoints count as inside). All estimates are reported
// either way; untested ones keep the "unadjusted" flag.
OrderedTestResult ordered_test(const EffectEstimate& primary,
                               const std::vector<EffectEstimate>& alternatives,
                               double tau0, double alpha = 0.05);

// Conditional-likelihood internals, exposed for verification: per-set
// log-likelihood, score, and information at a given beta.
struct CondLogisticSummary {
  double loglik = 0.0;
  double score = 0.0;
  double information = 0.0;
};
CondLogisticSummary conditional_logistic_at(const Matching& matching,
                                            const OutcomeMap& outcome,
                                            double beta);

void write_results_csv(const std::vector<EffectEstimate>& estimates,
                       const std::string& path);

}  // namespace cmatch
