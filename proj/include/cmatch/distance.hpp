#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cmatch {

struct DistanceMatrix {
  std::vector<std::string> exposed_ids;
  std::vector<std::string> control_ids;
  Eigen::MatrixXd entries;  // exposed x control, nonnegative
  long caliper_violations = 0;

  double at(int i, int j) const { return entries(i, j); }
};

// Column-wise ranks 1..n with ties given the average rank.
Eigen::MatrixXd rank_transform(const Eigen::MatrixXd& columns);

// Covariance of the rank columns with the diagonal rescaled to the untied
// variance (n^2 - 1)/12, pseudo-inverted when singular.
Eigen::MatrixXd rank_covariance_inverse(const Eigen::MatrixXd& ranks);

double rank_mahalanobis(const Eigen::MatrixXd& ranks,
                        const Eigen::MatrixXd& cov_inv, int i, int j);

// Distance matrix over a stratum: rows/cols index into `ranks` row order.
DistanceMatrix distance_matrix(const Eigen::MatrixXd& ranks,
                               const std::vector<std::string>& ids,
                               const std::vector<int>& exposed_rows,
                               const std::vector<int>& control_rows);

// Soft propensity-score caliper: entries whose |logit score| gap exceeds
// width * SD(logit score) gain penalty * (excess / (width * SD)).
DistanceMatrix apply_caliper(const DistanceMatrix& dm,
                             const std::vector<double>& exposed_scores,
                             const std::vector<double>& control_scores,
                             double width, double penalty);

void dump_distance_csv(const DistanceMatrix& dm, const std::string& path);

}  // namespace cmatch
