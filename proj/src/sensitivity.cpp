#include "cmatch/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmatch/csv.hpp"
#include "cmatch/errors.hpp"
#include "cmatch/stats.hpp"

namespace cmatch {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double upper_tail_exact(const std::vector<double>& probs, int t_obs) {
  // Convolution of independent Bernoullis; P(T >= t_obs).
  std::vector<double> dist = {1.0};
  for (double p : probs) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (size_t t = 0; t < dist.size(); ++t) {
      next[t] += dist[t] * (1 - p);
      next[t + 1] += dist[t] * p;
    }
    dist = std::move(next);
  }
  double p = 0;
  for (size_t t = std::max(t_obs, 0); t < dist.size(); ++t) p += dist[t];
  return std::min(p, 1.0);
}

double lower_tail_exact(const std::vector<double>& probs, int t_obs) {
  std::vector<double> dist = {1.0};
  for (double p : probs) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (size_t t = 0; t < dist.size(); ++t) {
      next[t] += dist[t] * (1 - p);
      next[t + 1] += dist[t] * p;
    }
    dist = std::move(next);
  }
  double p = 0;
  for (int t = 0; t <= t_obs && t < static_cast<int>(dist.size()); ++t)
    p += dist[t];
  return std::min(p, 1.0);
}

}  // namespace

double mh_sensitivity(const Matching& matching, const OutcomeMap& outcome,
                      double gamma, const SensitivityOptions& opt) {
  if (gamma < 1.0) throw ConfigError("mh_sensitivity: gamma must be >= 1");
  if (matching.sets.empty())
    throw DataError("mh_sensitivity: empty matching");

  int t_obs = 0;
  std::vector<double> mu;  // worst-case P(treated unit is a case) per set
  for (const auto& set : matching.sets) {
    auto val = [&](const std::string& id) {
      auto it = outcome.find(id);
      if (it == outcome.end())
        throw DataError("mh_sensitivity: no outcome for subject " + id);
      if (it->second != 0.0 && it->second != 1.0)
        throw DataError("mh_sensitivity: outcome not binary for " + id);
      return static_cast<int>(it->second);
    };
    int a = val(set.exposed_id);
    int m = a;
    int n = 1 + static_cast<int>(set.control_ids.size());
    for (const auto& c : set.control_ids) m += val(c);
    t_obs += a;
    // Extended hypergeometric with one treated unit: biased odds gamma on
    // the cases maximizes the chance the treated unit is a case.
    mu.push_back(gamma * m / (gamma * m + (n - m)));
  }

  if (static_cast<int>(mu.size()) <= opt.exact_set_limit) {
    double up = upper_tail_exact(mu, t_obs);
    if (!opt.two_sided) return up;
    // Worst-case lower tail uses the opposite extreme distribution.
    std::vector<double> mu_lo;
    for (const auto& set : matching.sets) {
      auto it = outcome.find(set.exposed_id);
      int m = static_cast<int>(it->second);
      int n = 1 + static_cast<int>(set.control_ids.size());
      for (const auto& c : set.control_ids)
        m += static_cast<int>(outcome.at(c));
      mu_lo.push_back(static_cast<double>(m) / (m + gamma * (n - m)));
    }
    double down = lower_tail_exact(mu_lo, t_obs);
    return std::min(1.0, 2 * std::min(up, down));
  }

  double mean = std::accumulate(mu.begin(), mu.end(), 0.0);
  double var = 0;
  for (double p : mu) var += p * (1 - p);
  if (var <= 0) return t_obs > mean ? 0.0 : 1.0;
  // Continuity-corrected tails for the integer-valued case count.
  double sd = std::sqrt(var);
  double up = 1 - normal_cdf((t_obs - 0.5 - mean) / sd);
  if (!opt.two_sided) return up;
  double down = normal_cdf((t_obs + 0.5 - mean) / sd);
  return std::min(1.0, 2 * std::min(up, down));
}

Eigen::VectorXd residualize(const Eigen::VectorXd& outcome,
                            const Eigen::MatrixXd& covariates) {
  if (outcome.size() != covariates.rows())
    throw ConfigError("residualize: dimension mismatch");
  Eigen::MatrixXd X(covariates.rows(), covariates.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(covariates.cols()) = covariates;
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(outcome);
  return outcome - X * beta;
}

double mtest_sensitivity(const std::map<std::string, double>& residuals,
                         const Matching& matching, double gamma,
                         const SensitivityOptions& opt) {
  if (gamma < 1.0) throw ConfigError("mtest_sensitivity: gamma must be >= 1");
  if (matching.sets.empty())
    throw DataError("mtest_sensitivity: empty matching");

  auto val = [&](const std::string& id) {
    auto it = residuals.find(id);
    if (it == residuals.end())
      throw DataError("mtest_sensitivity: no residual for subject " + id);
    return it->second;
  };

  // Treatment-blind scale: median over sets of the within-set range.
  std::vector<double> ranges;
  for (const auto& set : matching.sets) {
    double lo = val(set.exposed_id), hi = lo;
    for (const auto& c : set.control_ids) {
      double v = val(c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ranges.push_back(hi - lo);
  }
  std::sort(ranges.begin(), ranges.end());
  double scale = ranges[ranges.size() / 2];
  if (ranges.size() % 2 == 0)
    scale = 0.5 * (ranges[ranges.size() / 2 - 1] + ranges[ranges.size() / 2]);
  if (scale <= 0) return 1.0;  // all within-set differences vanish

  double t_obs = 0, mean = 0, var = 0;
  for (const auto& set : matching.sets) {
    const int n = 1 + static_cast<int>(set.control_ids.size());
    std::vector<double> r;
    r.push_back(val(set.exposed_id));
    for (const auto& c : set.control_ids) r.push_back(val(c));
    double sum = std::accumulate(r.begin(), r.end(), 0.0);
    // Contribution if subject j held the treated role: its residual minus
    // the mean of the rest, identity score, common scale.
    std::vector<double> contrib(n);
    for (int j = 0; j < n; ++j)
      contrib[j] = (r[j] - (sum - r[j]) / (n - 1)) / scale;
    t_obs += contrib[0];

    std::sort(contrib.begin(), contrib.end(), std::greater<>());
    // Worst-case treated-role distribution: biased odds gamma on the kappa
    // largest contributions, maximized over kappa.
    double best_mu = -kInf, best_nu = 0;
    double head = 0, head2 = 0;
    double total = std::accumulate(contrib.begin(), contrib.end(), 0.0);
    double total2 = 0;
    for (double c : contrib) total2 += c * c;
    for (int kappa = 1; kappa <= n; ++kappa) {
      head += contrib[kappa - 1];
      head2 += contrib[kappa - 1] * contrib[kappa - 1];
      double denom = gamma * kappa + (n - kappa);
      double mu = (gamma * head + (total - head)) / denom;
      if (mu > best_mu) {
        best_mu = mu;
        best_nu = (gamma * head2 + (total2 - head2)) / denom;
      }
    }
    mean += best_mu;
    var += std::max(best_nu - best_mu * best_mu, 0.0);
  }

  if (var <= 0) return t_obs > mean ? 0.0 : 1.0;
  double dev = (t_obs - mean) / std::sqrt(var);
  double up = 1 - normal_cdf(dev);
  if (!opt.two_sided) return up;
  return std::min(1.0, 2 * std::min(up, normal_cdf(dev)));
}

double find_gamma_star(const std::function<double(double)>& curve_fn,
                       double alpha, bool* insignificant_at_one) {
  if (insignificant_at_one) *insignificant_at_one = false;
  double p1 = curve_fn(1.0);
  if (p1 > alpha) {
    if (insignificant_at_one) *insignificant_at_one = true;
    return 1.0;
  }
  if (curve_fn(20.0) <= alpha) return kInf;
  double lo = 1.0, hi = 20.0;  // p(lo) <= alpha < p(hi)
  while (hi - lo > 1e-3) {
    double mid = 0.5 * (lo + hi);
    if (curve_fn(mid) > alpha)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

SensitivityCurve sensitivity_curve(const std::function<double(double)>& curve_fn,
                                   const std::vector<double>& gammas,
                                   double alpha) {
  SensitivityCurve c;
  for (double g : gammas) {
    c.gammas.push_back(g);
    c.p_upper.push_back(curve_fn(g));
  }
  c.gamma_star = find_gamma_star(curve_fn, alpha, &c.insignificant_at_one);
  return c;
}

void write_curve_csv(const SensitivityCurve& curve, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  for (size_t i = 0; i < curve.gammas.size(); ++i)
    rows.push_back({fmt(curve.gammas[i]), fmt(curve.p_upper[i])});
  rows.push_back({"gamma_star", std::isinf(curve.gamma_star)
                                    ? "inf"
                                    : fmt(curve.gamma_star)});
  write_csv(path, {"gamma", "p_upper"}, rows);
}

}  // namespace cmatch
