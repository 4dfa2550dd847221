#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmatch/balance.hpp"
#include "cmatch/cohort.hpp"
#include "cmatch/inference.hpp"
#include "cmatch/logistic.hpp"
#include "cmatch/matcher.hpp"
#include "cmatch/sensitivity.hpp"
#include "cmatch/synthetic.hpp"

namespace cmatch {

struct RunConfig {
  std::string input_csv;
  std::string schema_path;
  std::string out_dir;
  std::vector<std::string> outcomes;  // first entry is the primary outcome
  std::vector<int> k_range = {2, 3, 4, 5, 6, 7, 8};
  double caliper_width = 0.2;    // SDs of the logit propensity
  double caliper_penalty = -1;   // < 0: auto (twice the mean distance)
  double balance_threshold = 0.2;
  double gamma_start = 1.0, gamma_stop = 4.0, gamma_step = 0.25;
  double alpha = 0.05;
  double tau0_or = 1.0;  // null effect on the OR scale
  double tau0_sd = 0.0;  // null effect in SD units
  std::uint64_t seed = 1;
  std::vector<Comparison> comparisons = {Comparison::fb_ac, Comparison::fb_sc,
                                         Comparison::fb_nsc, Comparison::sc_nsc};

  void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config_template(const std::string& path);

struct ComparisonResult {
  ComparisonPlan plan;
  int K = 0;
  bool balanced = false;
  double max_abs_std_diff = 0.0;
  Matching matching;
  std::vector<BalanceRow> balance;
  std::map<int, int> composition;
  std::vector<EffectEstimate> estimates;
  std::map<std::string, SensitivityCurve> sensitivity;
  LogisticFit propensity_fit;
};

struct ReportBundle {
  SummaryTable table1;
  std::vector<MissingnessStratum> strata;
  std::vector<ComparisonResult> comparisons;
  std::map<std::string, OrderedTestResult> ordered;  // keyed by outcome
  std::vector<AttritionRow> attrition;
};

// Full pre-analysis plan: load, eligibility, outcome coding, missingness
// strata, then per comparison propensity -> distances -> K selection ->
// balance -> estimation -> sensitivity, plus the attrition models.
// Deterministic for a fixed config; writes the report files when
// config.out_dir is nonempty.
ReportBundle run_pipeline(const RunConfig& config);

// Same pipeline on an already-coded cohort (used by tests and simulate).
ReportBundle run_pipeline_on(const Cohort& cohort, const RunConfig& config);

void write_report(const ReportBundle& bundle, const RunConfig& config,
                  const std::string& out_dir);

}  // namespace cmatch
