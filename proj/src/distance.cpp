#include "cmatch/distance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cmatch/errors.hpp"

namespace cmatch {

Eigen::MatrixXd rank_transform(const Eigen::MatrixXd& columns) {
  const int n = static_cast<int>(columns.rows());
  Eigen::MatrixXd ranks(n, columns.cols());
  std::vector<int> order(n);
  for (int j = 0; j < columns.cols(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return columns(a, j) < columns(b, j);
    });
    int i = 0;
    while (i < n) {
      int k = i;
      while (k + 1 < n && columns(order[k + 1], j) == columns(order[i], j)) ++k;
      double avg = 0.5 * (i + k) + 1.0;  // ranks are 1-based
      for (int t = i; t <= k; ++t) ranks(order[t], j) = avg;
      i = k + 1;
    }
  }
  return ranks;
}

Eigen::MatrixXd rank_covariance_inverse(const Eigen::MatrixXd& ranks) {
  const int n = static_cast<int>(ranks.rows());
  const int p = static_cast<int>(ranks.cols());
  Eigen::MatrixXd centered = ranks.rowwise() - ranks.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / std::max(n - 1, 1);
  // Damp tie effects: force the untied-rank variance on the diagonal.
  const double untied_var = (static_cast<double>(n) * n - 1.0) / 12.0;
  for (int j = 0; j < p; ++j) {
    double sd = std::sqrt(cov(j, j));
    double target = std::sqrt(untied_var);
    if (sd > 0) {
      double scale = target / sd;
      cov.row(j) *= scale;
      cov.col(j) *= scale;
    } else {
      cov(j, j) = untied_var;
    }
  }
  // Pseudo-inverse via eigendecomposition; cutoff relative to the largest
  // eigenvalue covers singular covariances.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const auto& vals = es.eigenvalues();
  double cutoff = 1e-10 * vals.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv_vals(p);
  for (int j = 0; j < p; ++j)
    inv_vals[j] = vals[j] > cutoff ? 1.0 / vals[j] : 0.0;
  return es.eigenvectors() * inv_vals.asDiagonal() * es.eigenvectors().transpose();
}

double rank_mahalanobis(const Eigen::MatrixXd& ranks,
                        const Eigen::MatrixXd& cov_inv, int i, int j) {
  Eigen::VectorXd diff = ranks.row(i) - ranks.row(j);
  double d = diff.dot(cov_inv * diff);
  return d > 0 ? d : 0.0;
}

DistanceMatrix distance_matrix(const Eigen::MatrixXd& ranks,
                               const std::vector<std::string>& ids,
                               const std::vector<int>& exposed_rows,
                               const std::vector<int>& control_rows) {
  DistanceMatrix dm;
  for (int r : exposed_rows) dm.exposed_ids.push_back(ids[r]);
  for (int r : control_rows) dm.control_ids.push_back(ids[r]);
  Eigen::MatrixXd cov_inv = rank_covariance_inverse(ranks);
  dm.entries.resize(exposed_rows.size(), control_rows.size());
  for (size_t i = 0; i < exposed_rows.size(); ++i) {
    Eigen::VectorXd ri = ranks.row(exposed_rows[i]);
    for (size_t j = 0; j < control_rows.size(); ++j) {
      Eigen::VectorXd diff = ri - ranks.row(control_rows[j]).transpose();
      double d = diff.dot(cov_inv * diff);
      dm.entries(i, j) = d > 0 ? d : 0.0;
    }
  }
  return dm;
}

namespace {

double logit(double p) {
  p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

}  // namespace

DistanceMatrix apply_caliper(const DistanceMatrix& dm,
                             const std::vector<double>& exposed_scores,
                             const std::vector<double>& control_scores,
                             double width, double penalty) {
  if (width <= 0) throw ConfigError("apply_caliper: width must be positive");
  if (penalty < 0) throw ConfigError("apply_caliper: penalty must be >= 0");
  if (exposed_scores.size() != dm.exposed_ids.size() ||
      control_scores.size() != dm.control_ids.size())
    throw ConfigError("apply_caliper: score length mismatch");

  std::vector<double> logits;
  logits.reserve(exposed_scores.size() + control_scores.size());
  for (double p : exposed_scores) logits.push_back(logit(p));
  for (double p : control_scores) logits.push_back(logit(p));
  double mean = std::accumulate(logits.begin(), logits.end(), 0.0) / logits.size();
  double ss = 0;
  for (double v : logits) ss += (v - mean) * (v - mean);
  double sd = logits.size() > 1 ? std::sqrt(ss / (logits.size() - 1)) : 0.0;

  DistanceMatrix out = dm;
  out.caliper_violations = 0;
  if (sd == 0.0) return out;  // identical scores: nothing to penalize
  const double w = width * sd;
  for (int i = 0; i < out.entries.rows(); ++i) {
    double li = logit(exposed_scores[i]);
    for (int j = 0; j < out.entries.cols(); ++j) {
      double gap = std::abs(li - logit(control_scores[j]));
      if (gap > w) {
        out.entries(i, j) += penalty * (gap - w) / w;
        ++out.caliper_violations;
      }
    }
  }
  return out;
}

void dump_distance_csv(const DistanceMatrix& dm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write distance dump: " + path);
  out << "exposed_id";
  for (const auto& c : dm.control_ids) out << ',' << c;
  out << '\n';
  for (size_t i = 0; i < dm.exposed_ids.size(); ++i) {
    out << dm.exposed_ids[i];
    for (int j = 0; j < dm.entries.cols(); ++j)
      out << ',' << dm.entries(static_cast<int>(i), j);
    out << '\n';
  }
}

}  // namespace cmatch
