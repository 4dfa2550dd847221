#include "cmatch/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "cmatch/csv.hpp"
#include "cmatch/errors.hpp"

namespace cmatch {

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

bool parse_number(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && !s.empty();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Raw outcome cells: empty/NA or non-numeric-where-numeric-expected => missing.
bool outcome_cell_missing(const Schema& schema, const std::string& cell) {
  for (const auto& s : schema.default_sentinels)
    if (cell == s) return true;
  double v;
  if (parse_number(cell, v) && v < 0) return true;
  return false;
}

}  // namespace

std::string to_string(Group g) {
  switch (g) {
    case Group::football: return "football";
    case Group::sport_control: return "sport_control";
    case Group::nonsport_control: return "nonsport_control";
    case Group::excluded: return "excluded";
  }
  return "excluded";
}

std::string to_string(EligibilityRule r) {
  switch (r) {
    case EligibilityRule::no_yearbook: return "no_yearbook";
    case EligibilityRule::no_sport_info: return "no_sport_info";
    case EligibilityRule::collision_sport: return "collision_sport";
    case EligibilityRule::other_sport: return "other_sport";
  }
  return "?";
}

EligibilityRules EligibilityRules::standard() {
  return EligibilityRules{{EligibilityRule::no_yearbook,
                           EligibilityRule::no_sport_info,
                           EligibilityRule::collision_sport,
                           EligibilityRule::other_sport}};
}

std::vector<int> Cohort::eligible_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < subjects.size(); ++i)
    if (subjects[i].group != Group::excluded) out.push_back(static_cast<int>(i));
  return out;
}

int Cohort::eligible_count() const {
  return static_cast<int>(eligible_indices().size());
}

const Subject* Cohort::find(const std::string& id) const {
  for (const auto& s : subjects)
    if (s.id == id) return &s;
  return nullptr;
}

std::string MissingnessStratum::label() const {
  if (outcome_pattern.empty()) return "none";
  std::string out;
  for (const auto& o : outcome_pattern) {
    if (!out.empty()) out += '+';
    out += o;
  }
  return out;
}

Cohort load_cohort(const std::string& csv_path, const Schema& schema) {
  return load_cohort_table(read_csv(csv_path), schema);
}

Cohort load_cohort_table(const CsvTable& t, const Schema& schema) {
  auto require = [&](const std::string& name) {
    int c = t.col(name);
    if (c < 0) throw DataError("missing required column \"" + name + "\"");
    return c;
  };
  int id_col = require(schema.id_column);
  int yb_col = require(schema.yearbook_column);
  std::vector<int> cov_cols;
  for (const auto& cs : schema.covariates) cov_cols.push_back(require(cs.id));
  std::vector<int> sport_cols;
  for (const auto& sp : schema.sports) sport_cols.push_back(require(sp));
  // Raw outcome columns are optional as a set but named columns must parse.
  auto optional_col = [&](const std::string& name) { return t.col(name); };
  int srh_col = optional_col(schema.srh_column);
  int pain_col = optional_col(schema.pain_column);
  int adl_col = optional_col(schema.adl_column);
  int cancer_col = optional_col(schema.cancer_column);
  int icd9_col = optional_col(schema.cancer_icd9_column);
  int mw_col = optional_col(schema.max_weight_column);
  int mwa_col = optional_col(schema.max_weight_age_column);
  int ht_col = optional_col(schema.height_column);

  Cohort cohort;
  cohort.schema = schema;
  cohort.initial_count = static_cast<int>(t.rows.size());
  std::set<std::string> seen_ids;
  for (const auto& row : t.rows) {
    Subject s;
    s.id = row[id_col];
    if (!seen_ids.insert(s.id).second)
      throw DataError("duplicate subject id: " + s.id);
    const std::string& yb = row[yb_col];
    if (schema.is_missing_cell(yb)) {
      s.yearbook = -1;
    } else {
      double v;
      s.yearbook = (parse_number(yb, v) && v != 0) ? 1 : 0;
    }
    for (size_t k = 0; k < schema.covariates.size(); ++k) {
      const auto& cs = schema.covariates[k];
      const std::string& cell = row[cov_cols[k]];
      if (schema.is_missing_cell(cell, &cs)) {
        s.covariates.push_back(kMissing);
        continue;
      }
      if (cs.kind == CovariateKind::categorical) {
        auto it = std::find(cs.levels.begin(), cs.levels.end(), cell);
        if (it == cs.levels.end()) {
          s.covariates.push_back(kMissing);
        } else {
          s.covariates.push_back(
              static_cast<double>(it - cs.levels.begin()));
        }
      } else {
        double v;
        if (parse_number(cell, v))
          s.covariates.push_back(v);
        else
          s.covariates.push_back(kMissing);
      }
    }
    for (size_t k = 0; k < schema.sports.size(); ++k) {
      const std::string& cell = row[sport_cols[k]];
      if (schema.is_missing_cell(cell)) {
        s.sports.push_back(-1);
      } else {
        double v;
        s.sports.push_back((parse_number(cell, v) && v != 0) ? 1 : 0);
      }
    }
    auto raw = [&](int col, const std::string& key) {
      if (col >= 0 && !outcome_cell_missing(schema, row[col]))
        s.raw_outcomes[key] = row[col];
    };
    raw(srh_col, "srh");
    raw(pain_col, "pain");
    raw(adl_col, "adl");
    raw(cancer_col, "cancer");
    raw(mw_col, "max_weight");
    raw(mwa_col, "max_weight_age");
    raw(ht_col, "height");
    // ICD-9 codes ride along with the cancer flag; empty is a valid value.
    if (icd9_col >= 0 && !row[icd9_col].empty() && row[icd9_col] != "NA")
      s.raw_outcomes["cancer_icd9"] = row[icd9_col];
    cohort.subjects.push_back(std::move(s));
  }
  return cohort;
}

Cohort apply_eligibility(const Cohort& in, const EligibilityRules& rules) {
  Cohort out = in;
  out.provenance.clear();
  std::map<std::string, int> counts;
  for (const auto& r : rules.rules) counts[to_string(r)] = 0;

  const Schema& schema = out.schema;
  std::vector<bool> is_collision(schema.sports.size(), false);
  std::vector<bool> is_other(schema.sports.size(), false);
  int football_idx = -1;
  for (size_t k = 0; k < schema.sports.size(); ++k) {
    const std::string& sp = schema.sports[k];
    if (std::find(schema.collision_sports.begin(), schema.collision_sports.end(),
                  sp) != schema.collision_sports.end())
      is_collision[k] = true;
    if (std::find(schema.other_sports.begin(), schema.other_sports.end(), sp) !=
        schema.other_sports.end())
      is_other[k] = true;
    if (lower(sp).find("football") != std::string::npos)
      football_idx = static_cast<int>(k);
  }

  for (auto& s : out.subjects) {
    s.exclusion_rule.clear();
    bool no_sport_info = true;
    for (int v : s.sports)
      if (v >= 0) no_sport_info = false;
    for (const auto& r : rules.rules) {
      bool fires = false;
      switch (r) {
        case EligibilityRule::no_yearbook:
          fires = (s.yearbook != 1);
          break;
        case EligibilityRule::no_sport_info:
          fires = no_sport_info;
          break;
        case EligibilityRule::collision_sport:
          for (size_t k = 0; k < s.sports.size(); ++k)
            if (is_collision[k] && s.sports[k] == 1) fires = true;
          break;
        case EligibilityRule::other_sport:
          for (size_t k = 0; k < s.sports.size(); ++k)
            if (is_other[k] && s.sports[k] == 1) fires = true;
          break;
      }
      if (fires) {
        s.exclusion_rule = to_string(r);
        ++counts[s.exclusion_rule];
        break;
      }
    }
    if (!s.exclusion_rule.empty()) {
      s.group = Group::excluded;
      continue;
    }
    bool football = football_idx >= 0 && s.sports[football_idx] == 1;
    bool any_sport = false;
    for (size_t k = 0; k < s.sports.size(); ++k)
      if (s.sports[k] == 1 && static_cast<int>(k) != football_idx)
        any_sport = true;
    if (football)
      s.group = Group::football;
    else if (any_sport)
      s.group = Group::sport_control;
    else
      s.group = Group::nonsport_control;
  }
  for (const auto& r : rules.rules)
    out.provenance.push_back({to_string(r), counts[to_string(r)]});
  return out;
}

namespace {

double code_srh(const std::string& subj, const std::string& v) {
  std::string s = lower(v);
  if (s == "excellent" || s == "very good" || s == "good") return 1.0;
  if (s == "fair" || s == "poor") return 0.0;
  throw DataError("unknown self-rated health response \"" + v +
                  "\" for subject " + subj);
}

double code_pain(const std::string& subj, const std::string& v) {
  std::string s = lower(v);
  if (s == "some" || s == "most" || s == "all") return 1.0;
  if (s == "none" || s == "a few" || s == "few") return 0.0;
  throw DataError("unknown pain-limitation response \"" + v +
                  "\" for subject " + subj);
}

double code_adl(const std::string& subj, const std::string& v) {
  std::string s = lower(v);
  if (s == "any" || s == "difficulty" || s == "1") return 1.0;
  if (s == "none" || s == "no difficulty" || s == "0") return 0.0;
  throw DataError("unknown ADL response \"" + v + "\" for subject " + subj);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep))
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace

Cohort code_outcomes(const Cohort& in) {
  Cohort out = in;
  for (auto& s : out.subjects) {
    s.coded_outcomes.clear();
    auto raw = [&](const char* key) -> const std::string* {
      auto it = s.raw_outcomes.find(key);
      return it == s.raw_outcomes.end() ? nullptr : &it->second;
    };
    if (const auto* v = raw("srh"))
      s.coded_outcomes["self_rated_health"] = code_srh(s.id, *v);
    if (const auto* v = raw("pain"))
      s.coded_outcomes["pain_limits_activities"] = code_pain(s.id, *v);
    if (const auto* v = raw("adl"))
      s.coded_outcomes["adl_difficulty"] = code_adl(s.id, *v);
    if (const auto* v = raw("cancer")) {
      double flag;
      if (!parse_number(*v, flag))
        throw DataError("unknown cancer flag \"" + *v + "\" for subject " + s.id);
      if (flag == 0) {
        s.coded_outcomes["cancer"] = 0.0;
      } else {
        // Diagnoses whose ICD-9 code is on the smoking-related exclusion
        // list do not count toward the negative-control outcome.
        const auto* codes = raw("cancer_icd9");
        double coded = 1.0;
        if (codes) {
          coded = 0.0;
          for (const auto& code : split(*codes, ';')) {
            bool excluded =
                std::find(out.schema.icd9_exclusions.begin(),
                          out.schema.icd9_exclusions.end(),
                          code) != out.schema.icd9_exclusions.end();
            if (!excluded) coded = 1.0;
          }
        }
        s.coded_outcomes["cancer"] = coded;
      }
    }
    const auto* mw = raw("max_weight");
    const auto* mwa = raw("max_weight_age");
    const auto* ht = raw("height");
    if (mw && mwa && ht) {
      double w, age, h;
      if (parse_number(*mw, w) && parse_number(*mwa, age) &&
          parse_number(*ht, h) && h > 0 && w > 0 && age >= 18) {
        // Pounds and inches.
        s.coded_outcomes["max_adult_bmi"] = 703.0 * w / (h * h);
      }
    }
  }
  return out;
}

std::vector<MissingnessStratum> stratify_by_missingness(
    const Cohort& cohort, const std::vector<std::string>& outcomes) {
  if (outcomes.empty())
    throw ConfigError("stratify_by_missingness: outcome list is empty");
  std::map<std::set<std::string>, std::vector<std::string>> buckets;
  for (const auto& s : cohort.subjects) {
    if (s.group == Group::excluded) continue;
    std::set<std::string> pattern;
    for (const auto& o : outcomes)
      if (s.has_outcome(o)) pattern.insert(o);
    buckets[pattern].push_back(s.id);
  }
  std::vector<MissingnessStratum> out;
  for (auto& [pattern, ids] : buckets) {
    MissingnessStratum st;
    st.outcome_pattern = pattern;
    std::sort(ids.begin(), ids.end());
    st.subject_ids = std::move(ids);
    out.push_back(std::move(st));
  }
  return out;
}

SummaryTable summarize(const Cohort& cohort) {
  SummaryTable t;
  for (const auto& s : cohort.subjects) {
    switch (s.group) {
      case Group::football: ++t.football; break;
      case Group::sport_control: ++t.sport_controls; break;
      case Group::nonsport_control: ++t.nonsport_controls; break;
      case Group::excluded: break;
    }
  }
  t.eligible = t.football + t.sport_controls + t.nonsport_controls;
  if (t.eligible > 0) {
    t.football_pct = 100.0 * t.football / t.eligible;
    t.control_pct = 100.0 - t.football_pct;
  }
  for (size_t k = 0; k < cohort.schema.sports.size(); ++k) {
    std::array<int, 3> counts = {0, 0, 0};
    for (const auto& s : cohort.subjects) {
      if (s.sports.size() <= k || s.sports[k] != 1) continue;
      ++counts[0];
      if (s.group == Group::football) ++counts[1];
      if (s.group == Group::sport_control) ++counts[2];
    }
    t.sport_counts.push_back({cohort.schema.sports[k], counts});
  }
  return t;
}

}  // namespace cmatch
