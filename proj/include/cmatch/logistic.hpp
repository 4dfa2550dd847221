#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cmatch/cohort.hpp"

namespace cmatch {

struct FitOptions {
  int max_iterations = 50;
  double loglik_rel_tol = 1e-10;
  double gradient_tol = 1e-8;
  double separation_bound = 20.0;  // |coef| beyond this without convergence
  double ridge_lambda = 1e-4;      // fallback penalty on non-intercept terms
};

struct LogisticFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  bool converged = false;
  bool ridged = false;  // separation fallback was used
  int iterations = 0;
  double log_likelihood = 0.0;
  std::vector<std::string> columns;
};

double logistic(double eta);

// Bernoulli MLE by iteratively reweighted least squares with step-halving.
// The design must already contain an intercept column (column 0).
LogisticFit fit_logistic(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& response,
                         const FitOptions& options = {});

double predict(const LogisticFit& fit, const Eigen::VectorXd& row);
Eigen::VectorXd predict_all(const LogisticFit& fit, const Eigen::MatrixXd& design);

struct AttritionRow {
  std::string outcome;
  bool with_exposure = false;  // exposure-group indicators in the design
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct AttritionResult {
  LogisticFit with_exposure;
  LogisticFit without_exposure;
  std::vector<AttritionRow> report;
};

// Regresses the availability indicator of `outcome` on all baseline
// covariates over the eligible subjects. Fit twice, with and without
// exposure-group indicator columns; the report rows carry the exposure
// coefficients with 95% CIs.
AttritionResult attrition_analysis(const Cohort& cohort,
                                   const std::string& outcome,
                                   const FitOptions& options = {});

}  // namespace cmatch
