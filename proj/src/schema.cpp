#include "cmatch/schema.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "cmatch/errors.hpp"

namespace cmatch {

using nlohmann::json;

std::string to_string(CovariateKind k) {
  switch (k) {
    case CovariateKind::binary: return "binary";
    case CovariateKind::continuous: return "continuous";
    case CovariateKind::ordinal: return "ordinal";
    case CovariateKind::categorical: return "categorical";
  }
  return "continuous";
}

CovariateKind covariate_kind_from_string(const std::string& s) {
  if (s == "binary") return CovariateKind::binary;
  if (s == "continuous") return CovariateKind::continuous;
  if (s == "ordinal") return CovariateKind::ordinal;
  if (s == "categorical") return CovariateKind::categorical;
  throw ConfigError("unknown covariate kind: " + s);
}

int Schema::covariate_index(const std::string& id) const {
  for (size_t i = 0; i < covariates.size(); ++i)
    if (covariates[i].id == id) return static_cast<int>(i);
  return -1;
}

bool Schema::is_missing_cell(const std::string& cell,
                             const CovariateSpec* spec) const {
  for (const auto& s : default_sentinels)
    if (cell == s) return true;
  if (spec)
    for (const auto& s : spec->sentinels)
      if (cell == s) return true;
  if (negative_codes_missing && !cell.empty()) {
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end && *end == '\0' && v < 0 &&
        (!spec || spec->kind != CovariateKind::continuous))
      return true;
  }
  return false;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("schema parse error in " + path + ": " + e.what());
  }
  Schema s;
  std::set<std::string> seen;
  for (const auto& c : j.at("covariates")) {
    CovariateSpec cs;
    cs.id = c.at("id").get<std::string>();
    if (!seen.insert(cs.id).second)
      throw ConfigError("duplicate covariate id in schema: " + cs.id);
    cs.kind = covariate_kind_from_string(c.at("kind").get<std::string>());
    cs.label = c.value("label", cs.id);
    if (c.contains("levels"))
      cs.levels = c["levels"].get<std::vector<std::string>>();
    if (cs.kind == CovariateKind::categorical && cs.levels.empty())
      throw ConfigError("categorical covariate " + cs.id +
                        " must enumerate its levels");
    if (c.contains("sentinels"))
      cs.sentinels = c["sentinels"].get<std::vector<std::string>>();
    s.covariates.push_back(std::move(cs));
  }
  if (j.contains("sports")) s.sports = j["sports"].get<std::vector<std::string>>();
  if (j.contains("collision_sports"))
    s.collision_sports = j["collision_sports"].get<std::vector<std::string>>();
  if (j.contains("other_sports"))
    s.other_sports = j["other_sports"].get<std::vector<std::string>>();
  auto str = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = j[key].get<std::string>();
  };
  str("id_column", s.id_column);
  str("yearbook_column", s.yearbook_column);
  str("srh_column", s.srh_column);
  str("pain_column", s.pain_column);
  str("adl_column", s.adl_column);
  str("cancer_column", s.cancer_column);
  str("cancer_icd9_column", s.cancer_icd9_column);
  str("max_weight_column", s.max_weight_column);
  str("max_weight_age_column", s.max_weight_age_column);
  str("height_column", s.height_column);
  if (j.contains("default_sentinels"))
    s.default_sentinels = j["default_sentinels"].get<std::vector<std::string>>();
  if (j.contains("negative_codes_missing"))
    s.negative_codes_missing = j["negative_codes_missing"].get<bool>();
  if (j.contains("icd9_exclusions"))
    s.icd9_exclusions = j["icd9_exclusions"].get<std::vector<std::string>>();
  return s;
}

void save_schema(const Schema& s, const std::string& path) {
  json j;
  j["_doc"] =
      "Input schema: covariate kinds, missing-value sentinels, sport flag "
      "columns, and raw outcome columns. Cells equal to a sentinel (or any "
      "negative code for non-continuous columns) are treated as missing.";
  j["covariates"] = json::array();
  for (const auto& c : s.covariates) {
    json jc;
    jc["id"] = c.id;
    jc["kind"] = to_string(c.kind);
    jc["label"] = c.label;
    if (!c.levels.empty()) jc["levels"] = c.levels;
    if (!c.sentinels.empty()) jc["sentinels"] = c.sentinels;
    j["covariates"].push_back(jc);
  }
  j["sports"] = s.sports;
  j["collision_sports"] = s.collision_sports;
  j["other_sports"] = s.other_sports;
  j["id_column"] = s.id_column;
  j["yearbook_column"] = s.yearbook_column;
  j["srh_column"] = s.srh_column;
  j["pain_column"] = s.pain_column;
  j["adl_column"] = s.adl_column;
  j["cancer_column"] = s.cancer_column;
  j["cancer_icd9_column"] = s.cancer_icd9_column;
  j["max_weight_column"] = s.max_weight_column;
  j["max_weight_age_column"] = s.max_weight_age_column;
  j["height_column"] = s.height_column;
  j["default_sentinels"] = s.default_sentinels;
  j["negative_codes_missing"] = s.negative_codes_missing;
  j["icd9_exclusions"] = s.icd9_exclusions;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write schema file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cmatch
