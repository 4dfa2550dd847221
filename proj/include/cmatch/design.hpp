#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cmatch/cohort.hpp"

namespace cmatch {

// Expanded covariate matrix over a subject subset: continuous/ordinal columns
// as-is, binary as 0/1, categorical as reference-cell indicators (reference =
// most frequent level). Missing values are imputed within exposure group
// (mean for continuous, mode otherwise) and flagged by an appended
// missingness-indicator column per covariate that has any missing value.
struct Design {
  Eigen::MatrixXd X;                 // n x p, no intercept column
  std::vector<std::string> columns;  // expanded column names
  std::vector<std::string> row_ids;  // subject ids, row order
  std::vector<int> exposed;          // 0/1 per row

  int row_of(const std::string& id) const;  // -1 if absent
};

Design build_design(const Cohort& cohort, const std::vector<int>& subject_idx,
                    const std::vector<int>& exposed_flags,
                    bool missing_indicators = true);

// Prepends an all-ones intercept column.
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X);

}  // namespace cmatch
