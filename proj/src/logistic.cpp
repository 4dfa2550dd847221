#include "cmatch/logistic.hpp"

#include <cmath>

#include "cmatch/design.hpp"
#include "cmatch/errors.hpp"

namespace cmatch {

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    // log(1+e^eta) computed stably.
    double lse = eta[i] > 0 ? eta[i] + std::log1p(std::exp(-eta[i]))
                            : std::log1p(std::exp(eta[i]));
    ll += y[i] * eta[i] - lse;
  }
  return ll;
}

LogisticFit irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const FitOptions& opt, double lambda) {
  const int p = static_cast<int>(X.cols());
  Eigen::VectorXd ridge = Eigen::VectorXd::Constant(p, lambda);
  if (lambda > 0) ridge[0] = 0.0;  // intercept unpenalized

  LogisticFit fit;
  fit.ridged = lambda > 0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = X * beta;
  double ll = bernoulli_loglik(y, eta) - 0.5 * (ridge.array() * beta.array().square()).sum();

  for (int it = 0; it < opt.max_iterations; ++it) {
    fit.iterations = it + 1;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
      mu[i] = logistic(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    Eigen::VectorXd grad = X.transpose() * (y - mu) - ridge.asDiagonal() * beta;
    Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    info.diagonal() += ridge;
    Eigen::VectorXd step = info.ldlt().solve(grad);

    // Step-halving keeps the log-likelihood non-decreasing.
    double scale = 1.0;
    Eigen::VectorXd beta_new, eta_new;
    double ll_new = ll;
    for (int h = 0; h < 30; ++h) {
      beta_new = beta + scale * step;
      eta_new = X * beta_new;
      ll_new = bernoulli_loglik(y, eta_new) -
               0.5 * (ridge.array() * beta_new.array().square()).sum();
      if (ll_new >= ll - 1e-12) break;
      scale *= 0.5;
    }
    double rel_change = std::abs(ll_new - ll) / (std::abs(ll) + 1.0);
    beta = beta_new;
    eta = eta_new;
    ll = ll_new;
    // A plateauing log-likelihood only counts as convergence while the
    // coefficients stay bounded; diverging coefficients with a flat
    // likelihood are the signature of separation.
    if (grad.lpNorm<Eigen::Infinity>() < opt.gradient_tol ||
        (rel_change < opt.loglik_rel_tol &&
         beta.lpNorm<Eigen::Infinity>() <= opt.separation_bound)) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.log_likelihood = bernoulli_loglik(y, eta);
  Eigen::VectorXd mu(eta.size()), w(eta.size());
  for (int i = 0; i < eta.size(); ++i) {
    mu[i] = logistic(eta[i]);
    w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
  }
  Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
  info.diagonal() += ridge;
  Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.standard_errors = cov.diagonal().array().max(0.0).sqrt();
  return fit;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const FitOptions& opt) {
  if (X.rows() != y.size())
    throw ConfigError("fit_logistic: design rows != response length");
  for (int i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw DataError("fit_logistic: response must be binary 0/1");
  double mean = y.mean();
  if (mean <= 0.0 || mean >= 1.0)
    throw NumericalError("fit_logistic: degenerate response (no variation)");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::string dep;
    const auto& perm = qr.colsPermutation().indices();
    for (int j = static_cast<int>(qr.rank()); j < X.cols(); ++j) {
      if (!dep.empty()) dep += ", ";
      dep += "column " + std::to_string(perm[j]);
    }
    throw NumericalError("fit_logistic: rank-deficient design (" + dep + ")");
  }

  LogisticFit fit = irls(X, y, opt, 0.0);
  if (fit.coefficients.lpNorm<Eigen::Infinity>() > opt.separation_bound) {
    // Diverging coefficients signal a (near-)separated response, whether or
    // not the stopping rule fired: refit with a small ridge and flag the fit.
    int its = fit.iterations;
    fit = irls(X, y, opt, opt.ridge_lambda);
    fit.iterations += its;
  }
  return fit;
}

double predict(const LogisticFit& fit, const Eigen::VectorXd& row) {
  if (row.size() != fit.coefficients.size())
    throw ConfigError("predict: row dimension mismatch");
  return logistic(fit.coefficients.dot(row));
}

Eigen::VectorXd predict_all(const LogisticFit& fit, const Eigen::MatrixXd& X) {
  Eigen::VectorXd eta = X * fit.coefficients;
  Eigen::VectorXd out(eta.size());
  for (int i = 0; i < eta.size(); ++i) out[i] = logistic(eta[i]);
  return out;
}

AttritionResult attrition_analysis(const Cohort& cohort,
                                   const std::string& outcome,
                                   const FitOptions& opt) {
  const auto& names = study_outcomes();
  if (std::find(names.begin(), names.end(), outcome) == names.end())
    throw ConfigError("attrition_analysis: unknown outcome " + outcome);

  std::vector<int> idx = cohort.eligible_indices();
  if (idx.empty()) throw DataError("attrition_analysis: no eligible subjects");
  std::vector<int> exposed;
  Eigen::VectorXd avail(idx.size());
  Eigen::VectorXd fb(idx.size()), sc(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    const auto& s = cohort.subjects[idx[i]];
    exposed.push_back(s.group == Group::football ? 1 : 0);
    avail[i] = s.has_outcome(outcome) ? 1.0 : 0.0;
    fb[i] = s.group == Group::football ? 1.0 : 0.0;
    sc[i] = s.group == Group::sport_control ? 1.0 : 0.0;
  }
  Design d = build_design(cohort, idx, exposed);

  AttritionResult res;
  {
    Eigen::MatrixXd X(d.X.rows(), d.X.cols() + 3);
    X.col(0).setOnes();
    X.middleCols(1, d.X.cols()) = d.X;
    X.col(d.X.cols() + 1) = fb;
    X.col(d.X.cols() + 2) = sc;
    res.with_exposure = fit_logistic(X, avail, opt);
    res.with_exposure.columns.push_back("(intercept)");
    for (const auto& c : d.columns) res.with_exposure.columns.push_back(c);
    res.with_exposure.columns.push_back("group=football");
    res.with_exposure.columns.push_back("group=sport_control");
    int base = static_cast<int>(d.X.cols()) + 1;
    for (int k = 0; k < 2; ++k) {
      AttritionRow row;
      row.outcome = outcome;
      row.with_exposure = true;
      row.term = k == 0 ? "group=football" : "group=sport_control";
      row.estimate = res.with_exposure.coefficients[base + k];
      row.se = res.with_exposure.standard_errors[base + k];
      row.ci_lo = row.estimate - 1.959963984540054 * row.se;
      row.ci_hi = row.estimate + 1.959963984540054 * row.se;
      res.report.push_back(row);
    }
  }
  {
    Eigen::MatrixXd X = with_intercept(d.X);
    res.without_exposure = fit_logistic(X, avail, opt);
    res.without_exposure.columns.push_back("(intercept)");
    for (const auto& c : d.columns) res.without_exposure.columns.push_back(c);
  }
  return res;
}

}  // namespace cmatch
