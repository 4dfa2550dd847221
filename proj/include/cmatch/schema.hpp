#pragma once

#include <string>
#include <vector>

namespace cmatch {

enum class CovariateKind { binary, continuous, ordinal, categorical };

std::string to_string(CovariateKind k);
CovariateKind covariate_kind_from_string(const std::string& s);

struct CovariateSpec {
  std::string id;                     // data column name, e.g. "srbmi"
  CovariateKind kind = CovariateKind::continuous;
  std::string label;
  std::vector<std::string> levels;    // categorical only, nonempty
  std::vector<std::string> sentinels; // cell values treated as missing, in
                                      // addition to the schema-wide defaults
};

// Declares the input CSV layout: covariate columns, sport flag columns,
// the yearbook flag, raw outcome columns, and missing-value sentinels.
struct Schema {
  std::vector<CovariateSpec> covariates;
  std::vector<std::string> sports;            // flag column names, "sport_*"
  std::vector<std::string> collision_sports;  // subset of sports
  std::vector<std::string> other_sports;      // subset of sports; catch-all
  std::string id_column = "id";
  std::string yearbook_column = "yearbook";
  // Raw outcome response columns.
  std::string srh_column = "srh";
  std::string pain_column = "pain";
  std::string adl_column = "adl";
  std::string cancer_column = "cancer";
  std::string cancer_icd9_column = "cancer_icd9";
  std::string max_weight_column = "max_weight";
  std::string max_weight_age_column = "max_weight_age";
  std::string height_column = "height";
  // Schema-wide missing sentinels; a cell equal to any of these, empty, or a
  // negative numeric code is treated as missing.
  std::vector<std::string> default_sentinels = {"", "NA"};
  bool negative_codes_missing = true;
  // ICD-9 codes for smoking-related cancers excluded from the
  // negative-control outcome (lung 162, bladder 188 by default).
  std::vector<std::string> icd9_exclusions = {"162", "188"};

  int covariate_index(const std::string& id) const;  // -1 if absent
  bool is_missing_cell(const std::string& cell,
                       const CovariateSpec* spec = nullptr) const;
};

Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);

// Canonical coded-outcome names.
inline const std::vector<std::string>& study_outcomes() {
  static const std::vector<std::string> names = {
      "self_rated_health", "pain_limits_activities", "adl_difficulty",
      "cancer", "max_adult_bmi"};
  return names;
}

}  // namespace cmatch
