#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmatch/inference.hpp"
#include "cmatch/matcher.hpp"

namespace cmatch {

struct SensitivityCurve {
  std::vector<double> gammas;
  std::vector<double> p_upper;
  double gamma_star = 0.0;  // +inf sentinel when never sensitive
  bool insignificant_at_one = false;
};

struct SensitivityOptions {
  int exact_set_limit = 20;  // exact convolution at or below; normal beyond
  bool two_sided = false;    // doubled minimum tail
};

// Worst-case one-sided p bound for the Mantel-Haenszel statistic (number of
// exposed cases) when the within-set odds of treatment are bounded by gamma.
double mh_sensitivity(const Matching& matching, const OutcomeMap& outcome,
                      double gamma, const SensitivityOptions& options = {});

// OLS residuals of a continuous outcome on the covariate design.
Eigen::VectorXd residualize(const Eigen::VectorXd& outcome,
                            const Eigen::MatrixXd& covariates);

// Worst-case one-sided p bound for the untrimmed M-statistic on residual
// differences (identity score, scaled by the median within-set range).
double mtest_sensitivity(const std::map<std::string, double>& residuals,
                         const Matching& matching, double gamma,
                         const SensitivityOptions& options = {});

// Smallest gamma in [1, 20] with p_upper(gamma) > alpha, to 1e-3; returns 1
// (flagged) when already insignificant at gamma = 1, +inf sentinel when the
// curve stays below alpha at 20.
double find_gamma_star(const std::function<double(double)>& curve_fn,
                       double alpha = 0.05, bool* insignificant_at_one = nullptr);

SensitivityCurve sensitivity_curve(const std::function<double(double)>& curve_fn,
                                   const std::vector<double>& gammas,
                                   double alpha = 0.05);

void write_curve_csv(const SensitivityCurve& curve, const std::string& path);

}  // namespace cmatch
