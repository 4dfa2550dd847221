#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmatch/csv.hpp"
#include "cmatch/schema.hpp"

namespace cmatch {

enum class Group { football, sport_control, nonsport_control, excluded };

std::string to_string(Group g);

struct Subject {
  std::string id;
  Group group = Group::nonsport_control;
  // Parallel to Schema::covariates; NaN marks missing. Categorical values are
  // stored as level indices.
  std::vector<double> covariates;
  // Per-sport participation flags, parallel to Schema::sports; -1 missing.
  std::vector<int> sports;
  int yearbook = -1;  // -1 missing, else 0/1
  std::map<std::string, std::string> raw_outcomes;
  std::map<std::string, double> coded_outcomes;  // key present => coded value
  std::string exclusion_rule;  // first rule that fired; empty if eligible

  bool has_outcome(const std::string& name) const {
    return coded_outcomes.count(name) > 0;
  }
};

struct ExclusionRecord {
  std::string rule;
  int count = 0;
};

struct Cohort {
  Schema schema;
  std::vector<Subject> subjects;
  std::vector<ExclusionRecord> provenance;
  int initial_count = 0;

  std::vector<int> eligible_indices() const;
  int eligible_count() const;
  const Subject* find(const std::string& id) const;
};

enum class EligibilityRule { no_yearbook, no_sport_info, collision_sport, other_sport };

std::string to_string(EligibilityRule r);

struct EligibilityRules {
  std::vector<EligibilityRule> rules;  // applied in order
  static EligibilityRules standard();
};

struct MissingnessStratum {
  std::set<std::string> outcome_pattern;  // available outcome names
  std::vector<std::string> subject_ids;

  std::string label() const;
};

// Table 1-style counts: per sport and per group.
struct SummaryTable {
  int eligible = 0;
  int football = 0;
  int sport_controls = 0;
  int nonsport_controls = 0;
  double football_pct = 0.0;
  double control_pct = 0.0;
  // sport -> (initial pool, eligible football, eligible sport controls)
  std::vector<std::pair<std::string, std::array<int, 3>>> sport_counts;
};

Cohort load_cohort(const std::string& csv_path, const Schema& schema);
Cohort load_cohort_table(const CsvTable& table, const Schema& schema);

// Marks subjects failing the rules as excluded (first firing rule recorded)
// and assigns exposure groups to the rest. Populates provenance counts.
Cohort apply_eligibility(const Cohort& cohort, const EligibilityRules& rules);

// Dichotomizes the raw survey responses into coded outcomes. Idempotent.
Cohort code_outcomes(const Cohort& cohort);

std::vector<MissingnessStratum> stratify_by_missingness(
    const Cohort& cohort, const std::vector<std::string>& outcomes);

SummaryTable summarize(const Cohort& cohort);

}  // namespace cmatch
