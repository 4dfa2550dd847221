#include "cmatch/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cmatch/errors.hpp"

namespace cmatch {

int Design::row_of(const std::string& id) const {
  for (size_t i = 0; i < row_ids.size(); ++i)
    if (row_ids[i] == id) return static_cast<int>(i);
  return -1;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

Design build_design(const Cohort& cohort, const std::vector<int>& subject_idx,
                    const std::vector<int>& exposed_flags,
                    bool missing_indicators) {
  if (subject_idx.size() != exposed_flags.size())
    throw ConfigError("build_design: index/flag length mismatch");
  const auto& specs = cohort.schema.covariates;
  const int n = static_cast<int>(subject_idx.size());

  Design d;
  d.exposed = exposed_flags;
  for (int i : subject_idx) d.row_ids.push_back(cohort.subjects[i].id);

  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> names;

  for (size_t k = 0; k < specs.size(); ++k) {
    const auto& cs = specs[k];
    Eigen::VectorXd raw(n);
    Eigen::VectorXd miss(n);
    bool any_missing = false;
    for (int i = 0; i < n; ++i) {
      double v = cohort.subjects[subject_idx[i]].covariates[k];
      raw[i] = v;
      miss[i] = std::isnan(v) ? 1.0 : 0.0;
      if (std::isnan(v)) any_missing = true;
    }
    // Within-group imputation: mean for continuous/ordinal, mode otherwise.
    for (int g = 0; g <= 1; ++g) {
      if (cs.kind == CovariateKind::continuous || cs.kind == CovariateKind::ordinal) {
        double sum = 0;
        int cnt = 0;
        for (int i = 0; i < n; ++i)
          if (exposed_flags[i] == g && !std::isnan(raw[i])) {
            sum += raw[i];
            ++cnt;
          }
        double fill = cnt > 0 ? sum / cnt : 0.0;
        for (int i = 0; i < n; ++i)
          if (exposed_flags[i] == g && std::isnan(raw[i])) raw[i] = fill;
      } else {
        std::map<double, int> freq;
        for (int i = 0; i < n; ++i)
          if (exposed_flags[i] == g && !std::isnan(raw[i])) ++freq[raw[i]];
        double fill = 0.0;
        int best = -1;
        for (const auto& [v, c] : freq)
          if (c > best) {
            best = c;
            fill = v;
          }
        for (int i = 0; i < n; ++i)
          if (exposed_flags[i] == g && std::isnan(raw[i])) raw[i] = fill;
      }
    }
    if (cs.kind == CovariateKind::categorical) {
      // Reference level = most frequent overall.
      std::vector<int> freq(cs.levels.size(), 0);
      for (int i = 0; i < n; ++i) {
        int lv = static_cast<int>(raw[i]);
        if (lv >= 0 && lv < static_cast<int>(freq.size())) ++freq[lv];
      }
      int ref = static_cast<int>(
          std::max_element(freq.begin(), freq.end()) - freq.begin());
      for (size_t lv = 0; lv < cs.levels.size(); ++lv) {
        if (static_cast<int>(lv) == ref) continue;
        Eigen::VectorXd ind(n);
        for (int i = 0; i < n; ++i)
          ind[i] = (static_cast<int>(raw[i]) == static_cast<int>(lv)) ? 1.0 : 0.0;
        cols.push_back(ind);
        names.push_back(cs.id + "=" + cs.levels[lv]);
      }
    } else {
      cols.push_back(raw);
      names.push_back(cs.id);
    }
    if (missing_indicators && any_missing) {
      cols.push_back(miss);
      names.push_back(cs.id + ":missing");
    }
  }

  d.X.resize(n, static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) d.X.col(j) = cols[j];
  d.columns = std::move(names);
  return d;
}

}  // namespace cmatch
