#include "cmatch/synthetic.hpp"

#include <cmath>
#include <random>

#include "cmatch/errors.hpp"
#include "cmatch/logistic.hpp"

namespace cmatch {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Cohort SyntheticData::to_cohort() const {
  Cohort c = load_cohort_table(table, schema);
  c = apply_eligibility(c, EligibilityRules::standard());
  return code_outcomes(c);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n <= 0) throw ConfigError("generate_synthetic: n must be positive");
  if (spec.p_football <= 0 || spec.p_football >= 1)
    throw ConfigError("generate_synthetic: exposure prevalence outside (0,1)");
  for (const auto& [name, rate] : spec.missing_rates)
    if (rate < 0 || rate > 1)
      throw ConfigError("generate_synthetic: missing rate outside [0,1] for " + name);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticData out;
  Schema& schema = out.schema;
  const int p = spec.n_covariates;
  for (int j = 0; j < p; ++j) {
    CovariateSpec cs;
    cs.id = "x" + std::to_string(j + 1);
    cs.kind = (j % 2 == 0) ? CovariateKind::continuous : CovariateKind::binary;
    cs.label = "synthetic covariate " + std::to_string(j + 1);
    schema.covariates.push_back(cs);
  }
  schema.sports = {"sport_football", "sport_basketball", "sport_hockey",
                   "sport_wrestling", "sport_other"};
  schema.collision_sports = {"sport_hockey", "sport_wrestling"};
  schema.other_sports = {"sport_other"};

  CsvTable& t = out.table;
  t.header = {schema.id_column, schema.yearbook_column};
  for (const auto& sp : schema.sports) t.header.push_back(sp);
  for (const auto& cs : schema.covariates) t.header.push_back(cs.id);
  t.header.insert(t.header.end(),
                  {schema.srh_column, schema.pain_column, schema.adl_column,
                   schema.cancer_column, schema.cancer_icd9_column,
                   schema.max_weight_column, schema.max_weight_age_column,
                   schema.height_column});

  auto effect = [&](const char* name) {
    auto it = spec.true_effects.find(name);
    return it == spec.true_effects.end() ? 0.0 : it->second;
  };
  auto missing = [&](const char* name) {
    auto it = spec.missing_rates.find(name);
    return it == spec.missing_rates.end() ? 0.0 : it->second;
  };

  const double alpha = std::log(spec.p_football / (1 - spec.p_football));
  const double rho = spec.covariate_correlation;

  for (int i = 0; i < spec.n; ++i) {
    // AR(1)-correlated latent normals; odd columns dichotomized at 0.
    std::vector<double> latent(p), x(p);
    double u = 0;  // confounder index driving exposure and outcomes
    for (int j = 0; j < p; ++j) {
      double z = normal(rng);
      latent[j] = j == 0 ? z : rho * latent[j - 1] + std::sqrt(1 - rho * rho) * z;
      x[j] = (j % 2 == 0) ? latent[j] : (latent[j] > 0 ? 1.0 : 0.0);
      u += latent[j] * ((j % 2 == 0) ? 1.0 : -1.0);
    }
    u /= std::sqrt(static_cast<double>(p));

    bool football = unif(rng) < logistic(alpha + spec.confounding * u);
    bool sport_control = false;
    if (!football) {
      double psc = spec.p_sport_control;
      double eta = std::log(psc / (1 - psc)) + 0.5 * spec.confounding * u;
      sport_control = unif(rng) < logistic(eta);
    }

    double fb = football ? 1.0 : 0.0;
    auto bin_outcome = [&](const char* name, double base_logit) {
      double eta = base_logit + spec.outcome_confounding * u + effect(name) * fb;
      return unif(rng) < logistic(eta) ? 1 : 0;
    };
    int srh = bin_outcome("self_rated_health", 1.0);
    int pain = bin_outcome("pain_limits_activities", -1.0);
    int adl = bin_outcome("adl_difficulty", -1.5);
    int cancer = bin_outcome("cancer", -2.0);
    double bmi = 26.0 + 2.0 * u + effect("max_adult_bmi") * fb + 3.0 * normal(rng);
    bmi = std::max(bmi, 15.0);

    std::vector<std::string> row;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "s%06d", i);
    row.push_back(idbuf);
    row.push_back("1");  // yearbook available
    row.push_back(football ? "1" : "0");
    row.push_back(sport_control ? "1" : "0");
    row.push_back("0");  // hockey
    row.push_back("0");  // wrestling
    row.push_back("0");  // other
    for (int j = 0; j < p; ++j) row.push_back(num(x[j]));

    auto keep = [&](const char* name) { return unif(rng) >= missing(name); };
    row.push_back(keep("self_rated_health") ? (srh ? "good" : "fair") : "NA");
    row.push_back(keep("pain_limits_activities") ? (pain ? "most" : "none") : "NA");
    row.push_back(keep("adl_difficulty") ? (adl ? "any" : "none") : "NA");
    if (keep("cancer")) {
      row.push_back(cancer ? "1" : "0");
      row.push_back(cancer ? "172" : "");  // melanoma: not smoking-related
    } else {
      row.push_back("NA");
      row.push_back("");
    }
    if (keep("max_adult_bmi")) {
      const double height = 70.0;
      row.push_back(num(bmi * height * height / 703.0));
      row.push_back("30");
      row.push_back(num(height));
    } else {
      row.push_back("NA");
      row.push_back("NA");
      row.push_back("NA");
    }
    t.rows.push_back(std::move(row));
  }
  return out;
}

void write_synthetic(const SyntheticData& data, const std::string& csv_path,
                     const std::string& schema_path) {
  write_csv(csv_path, data.table.header, data.table.rows);
  save_schema(data.schema, schema_path);
}

}  // namespace cmatch
