#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmatch/cohort.hpp"
#include "cmatch/distance.hpp"

namespace cmatch {

struct MatchedSet {
  std::string exposed_id;
  std::vector<std::string> control_ids;  // nonempty, sorted
  std::string stratum;
  int block_k = 1;
};

struct Matching {
  std::vector<MatchedSet> sets;
  std::vector<std::string> discarded_exposed;
  std::vector<std::string> discarded_controls;
  double total_distance = 0.0;

  int matched_subjects() const;
  void append(Matching other);
  // Composition counts: ratio -> number of sets (Appendix-table layout).
  std::map<int, int> composition() const;
};

// 1:k optimal matching by min-cost flow; every exposed unit receives exactly
// k controls. Requires controls >= k * exposed.
Matching optimal_assignment(const DistanceMatrix& dm, int k);

// For blocks with more exposed than controls: optimal pairs for every
// control, most dissimilar exposed units discarded.
Matching pair_match_discard(const DistanceMatrix& dm);

// Propensity-interval blocking: block k=1 gets scores in (1/2, 1], block k=K
// gets (0, 1/K], otherwise (1/(k+1), 1/k]. Deficient blocks fall back to
// ratio floor(controls/exposed), or to pair matching when exposed > controls.
Matching variable_ratio_match(const DistanceMatrix& dm,
                              const std::vector<double>& exposed_scores,
                              const std::vector<double>& control_scores,
                              int max_ratio, const std::string& stratum = "");

int propensity_block(double score, int max_ratio);

struct KSelection {
  int K = 0;
  Matching matching;
  double max_abs_std_diff = 0.0;
  bool balanced = false;
};

// Runs `match` for each K, keeps those whose balance criterion
// (max |std diff| < threshold) holds, and among them picks the K matching the
// most subjects (ties to the smaller K). Falls back to the best-balance K,
// flagged unbalanced, when none qualifies.
KSelection select_K(const std::vector<int>& k_range,
                    const std::function<Matching(int)>& match,
                    const std::function<double(const Matching&)>& max_std_diff,
                    double threshold = 0.2);

enum class Comparison { fb_ac, fb_sc, fb_nsc, sc_nsc };

std::string to_string(Comparison c);
Comparison comparison_from_string(const std::string& s);

struct ComparisonPlan {
  Comparison id = Comparison::fb_ac;
  Group exposed_group = Group::football;
  std::vector<Group> control_groups;
  bool empty_flag = false;  // a required group is absent from the cohort
};

std::vector<ComparisonPlan> build_comparisons(const Cohort& cohort);

void write_matching_csv(const Matching& m, const std::string& path);

}  // namespace cmatch
