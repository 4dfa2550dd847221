#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmatch/design.hpp"
#include "cmatch/matcher.hpp"

namespace cmatch {

struct BalanceRow {
  std::string covariate;
  double exposed_before = 0, control_before = 0;
  double exposed_after = 0, control_after = 0;
  double std_diff_before = 0, std_diff_after = 0;
  bool flag_before = false, flag_after = false;
};

// Pooled SD from the unweighted pre-matching groups: sqrt((s_e^2 + s_c^2)/2).
double pooled_sd(const std::vector<double>& exposed_values,
                 const std::vector<double>& control_values);

// Weighted standardized difference. The pooled SD is frozen at its pre-match
// value so before/after columns stay comparable; zero SD with equal means
// gives 0, otherwise +inf.
double std_diff(const std::vector<double>& exposed_values,
                const std::vector<double>& control_values,
                const std::vector<double>& control_weights, double pooled);

// Matched-set composition weighting: controls get weight 1/(set size - 1)
// and set contributions are averaged so each exposed unit counts once.
double weighted_control_mean(const Matching& matching,
                             const std::map<std::string, double>& values);

// One row per expanded covariate column of `design` (categoricals already
// expanded per level). `design` must cover the full pre-match comparison
// population; the matching selects the after-match subset.
std::vector<BalanceRow> balance_table(const Matching& matching,
                                      const Design& design,
                                      double threshold = 0.2);

double max_abs_std_diff_after(const std::vector<BalanceRow>& rows);

void write_balance_csv(const std::vector<BalanceRow>& rows,
                       const std::string& path);
void write_balance_markdown(const std::vector<BalanceRow>& rows,
                            const std::string& exposed_label,
                            const std::string& control_label,
                            const std::string& path);

}  // namespace cmatch
