#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cmatch/cohort.hpp"
#include "cmatch/csv.hpp"
#include "cmatch/schema.hpp"

namespace cmatch {

struct SyntheticSpec {
  int n = 2000;
  double p_football = 0.375;       // target exposure prevalence
  double p_sport_control = 0.35;   // sport-control share among controls
  int n_covariates = 6;            // half continuous, half binary
  double covariate_correlation = 0.3;
  double confounding = 0.0;        // covariate shift of exposure odds
  double outcome_confounding = 0.5;  // covariate effect on outcomes
  // log-odds for binary outcomes, BMI units for max_adult_bmi
  std::map<std::string, double> true_effects;
  std::map<std::string, double> missing_rates;
};

struct SyntheticData {
  Schema schema;
  CsvTable table;

  Cohort to_cohort() const;  // load + eligibility + outcome coding
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

void write_synthetic(const SyntheticData& data, const std::string& csv_path,
                     const std::string& schema_path);

}  // namespace cmatch
