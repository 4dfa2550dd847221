#include "cmatch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "cmatch/design.hpp"
#include "cmatch/distance.hpp"
#include "cmatch/errors.hpp"

namespace cmatch {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (outcomes.empty()) throw ConfigError("config: outcome list is empty");
  if (alpha <= 0 || alpha >= 1) throw ConfigError("config: alpha outside (0,1)");
  if (k_range.empty()) throw ConfigError("config: empty k_range");
  for (int k : k_range)
    if (k < 2 || k > 8) throw ConfigError("config: k_range entries must lie in [2,8]");
  if (caliper_width <= 0) throw ConfigError("config: caliper width must be > 0");
  if (gamma_start < 1 || gamma_stop < gamma_start || gamma_step <= 0)
    throw ConfigError("config: bad gamma grid");
  const auto& known = study_outcomes();
  for (const auto& o : outcomes)
    if (std::find(known.begin(), known.end(), o) == known.end())
      throw ConfigError("config: unknown outcome " + o);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  RunConfig c;
  c.input_csv = j.value("input", "");
  c.schema_path = j.value("schema", "");
  c.out_dir = j.value("out", "");
  if (j.contains("outcomes"))
    c.outcomes = j["outcomes"].get<std::vector<std::string>>();
  if (j.contains("k_range")) c.k_range = j["k_range"].get<std::vector<int>>();
  if (j.contains("caliper")) {
    c.caliper_width = j["caliper"].value("width", c.caliper_width);
    c.caliper_penalty = j["caliper"].value("penalty", c.caliper_penalty);
  }
  c.balance_threshold = j.value("balance_threshold", c.balance_threshold);
  if (j.contains("gamma")) {
    c.gamma_start = j["gamma"].value("start", c.gamma_start);
    c.gamma_stop = j["gamma"].value("stop", c.gamma_stop);
    c.gamma_step = j["gamma"].value("step", c.gamma_step);
  }
  c.alpha = j.value("alpha", c.alpha);
  c.tau0_or = j.value("tau0_or", c.tau0_or);
  c.tau0_sd = j.value("tau0_sd", c.tau0_sd);
  c.seed = j.value("seed", c.seed);
  if (j.contains("comparisons")) {
    c.comparisons.clear();
    for (const auto& s : j["comparisons"])
      c.comparisons.push_back(comparison_from_string(s.get<std::string>()));
  }
  c.validate();
  return c;
}

void save_config_template(const std::string& path) {
  json j;
  j["_doc"] =
      "Run configuration. outcomes[0] is the primary outcome; k_range is the "
      "candidate maximum matching ratio (2..8); caliper width is in SDs of "
      "the logit propensity and penalty < 0 means auto (twice the mean "
      "distance); gamma defines the sensitivity grid.";
  j["input"] = "cohort.csv";
  j["schema"] = "schema.json";
  j["out"] = "out";
  j["outcomes"] = {"self_rated_health", "pain_limits_activities",
                   "adl_difficulty", "cancer", "max_adult_bmi"};
  j["k_range"] = {2, 3, 4, 5, 6, 7, 8};
  j["caliper"] = {{"width", 0.2}, {"penalty", -1.0}};
  j["balance_threshold"] = 0.2;
  j["gamma"] = {{"start", 1.0}, {"stop", 4.0}, {"step", 0.25}};
  j["alpha"] = 0.05;
  j["tau0_or"] = 1.0;
  j["tau0_sd"] = 0.0;
  j["seed"] = 1;
  j["comparisons"] = {"fb-ac", "fb-sc", "fb-nsc", "sc-nsc"};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config template: " + path);
  out << j.dump(2) << '\n';
}

namespace {

struct StratumInstance {
  std::string label;
  std::set<std::string> pattern;
  DistanceMatrix dm;  // caliper already applied
  std::vector<double> exposed_scores, control_scores;
};

// Per-comparison working state shared across candidate K values.
struct ComparisonContext {
  std::vector<int> subject_idx;   // cohort indices
  std::vector<int> exposed_flag;  // parallel to subject_idx
  Design design;                  // covariates over the comparison subjects
  LogisticFit propensity;
  std::map<std::string, double> score_by_id;
  std::vector<StratumInstance> strata;
};

ComparisonContext prepare_comparison(const Cohort& cohort,
                                     const ComparisonPlan& plan,
                                     const std::vector<MissingnessStratum>& strata,
                                     const RunConfig& cfg) {
  ComparisonContext ctx;
  for (size_t i = 0; i < cohort.subjects.size(); ++i) {
    const auto& s = cohort.subjects[i];
    if (s.group == plan.exposed_group) {
      ctx.subject_idx.push_back(static_cast<int>(i));
      ctx.exposed_flag.push_back(1);
    } else if (std::find(plan.control_groups.begin(), plan.control_groups.end(),
                         s.group) != plan.control_groups.end()) {
      ctx.subject_idx.push_back(static_cast<int>(i));
      ctx.exposed_flag.push_back(0);
    }
  }
  ctx.design = build_design(cohort, ctx.subject_idx, ctx.exposed_flag);

  // Propensity model fit on this comparison's subjects only.
  Eigen::MatrixXd X = with_intercept(ctx.design.X);
  Eigen::VectorXd y(ctx.exposed_flag.size());
  for (size_t i = 0; i < ctx.exposed_flag.size(); ++i) y[i] = ctx.exposed_flag[i];
  ctx.propensity = fit_logistic(X, y);
  Eigen::VectorXd scores = predict_all(ctx.propensity, X);
  for (size_t i = 0; i < ctx.design.row_ids.size(); ++i)
    ctx.score_by_id[ctx.design.row_ids[i]] = scores[static_cast<int>(i)];

  // One distance matrix per missingness stratum; ranks are within-stratum.
  std::map<std::string, int> row_by_id;
  for (size_t i = 0; i < ctx.design.row_ids.size(); ++i)
    row_by_id[ctx.design.row_ids[i]] = static_cast<int>(i);
  for (const auto& st : strata) {
    std::vector<int> rows;
    std::vector<int> exposed_rows, control_rows;
    std::vector<std::string> ids;
    for (const auto& id : st.subject_ids) {
      auto it = row_by_id.find(id);
      if (it == row_by_id.end()) continue;  // not in this comparison
      int local = static_cast<int>(rows.size());
      rows.push_back(it->second);
      ids.push_back(id);
      if (ctx.exposed_flag[it->second])
        exposed_rows.push_back(local);
      else
        control_rows.push_back(local);
    }
    if (exposed_rows.empty() || control_rows.empty()) continue;

    Eigen::MatrixXd cols(rows.size(), ctx.design.X.cols());
    for (size_t r = 0; r < rows.size(); ++r) cols.row(r) = ctx.design.X.row(rows[r]);
    Eigen::MatrixXd ranks = rank_transform(cols);
    StratumInstance inst;
    inst.label = MissingnessStratum{st.outcome_pattern, {}}.label();
    inst.pattern = st.outcome_pattern;
    inst.dm = distance_matrix(ranks, ids, exposed_rows, control_rows);
    for (int r : exposed_rows) inst.exposed_scores.push_back(ctx.score_by_id[ids[r]]);
    for (int r : control_rows) inst.control_scores.push_back(ctx.score_by_id[ids[r]]);
    double penalty = cfg.caliper_penalty;
    if (penalty < 0) {
      double m = inst.dm.entries.size() > 0 ? inst.dm.entries.mean() : 0.0;
      penalty = 2.0 * m;
    }
    inst.dm = apply_caliper(inst.dm, inst.exposed_scores, inst.control_scores,
                            cfg.caliper_width, penalty);
    ctx.strata.push_back(std::move(inst));
  }
  return ctx;
}

Matching match_all_strata(const ComparisonContext& ctx, int K) {
  Matching all;
  for (const auto& st : ctx.strata) {
    Matching m = variable_ratio_match(st.dm, st.exposed_scores,
                                      st.control_scores, K, st.label);
    all.append(std::move(m));
  }
  return all;
}

Matching filter_by_outcome(const Matching& m, const OutcomeMap& available) {
  Matching out;
  for (const auto& set : m.sets) {
    bool ok = available.count(set.exposed_id) > 0;
    for (const auto& c : set.control_ids)
      if (!available.count(c)) ok = false;
    if (ok) out.sets.push_back(set);
  }
  out.total_distance = 0;
  return out;
}

double balance_criterion(const ComparisonContext& ctx,
                         const std::map<std::string, OutcomeMap>& values,
                         const Matching& m, const RunConfig& cfg) {
  if (m.sets.empty()) return std::numeric_limits<double>::infinity();
  double worst = max_abs_std_diff_after(
      balance_table(m, ctx.design, cfg.balance_threshold));
  // Secondary-outcome subsets must balance too.
  for (size_t i = 1; i < cfg.outcomes.size(); ++i) {
    Matching sub = filter_by_outcome(m, values.at(cfg.outcomes[i]));
    if (sub.sets.empty()) continue;
    worst = std::max(worst, max_abs_std_diff_after(balance_table(
                                sub, ctx.design, cfg.balance_threshold)));
  }
  return worst;
}

OutcomeMap outcome_values(const Cohort& cohort, const std::string& outcome) {
  OutcomeMap out;
  for (const auto& s : cohort.subjects) {
    auto it = s.coded_outcomes.find(outcome);
    if (it != s.coded_outcomes.end()) out[s.id] = it->second;
  }
  return out;
}

std::vector<double> gamma_grid(const RunConfig& cfg) {
  std::vector<double> g;
  for (double v = cfg.gamma_start; v <= cfg.gamma_stop + 1e-9; v += cfg.gamma_step)
    g.push_back(v);
  return g;
}

}  // namespace

ReportBundle run_pipeline_on(const Cohort& cohort, const RunConfig& cfg) {
  cfg.validate();
  ReportBundle bundle;
  bundle.table1 = summarize(cohort);
  bundle.strata = stratify_by_missingness(cohort, cfg.outcomes);

  auto plans = build_comparisons(cohort);
  std::map<std::string, OutcomeMap> values_by_outcome;
  for (const auto& o : cfg.outcomes)
    values_by_outcome[o] = outcome_values(cohort, o);

  for (const auto& plan : plans) {
    if (std::find(cfg.comparisons.begin(), cfg.comparisons.end(), plan.id) ==
        cfg.comparisons.end())
      continue;
    ComparisonResult res;
    res.plan = plan;
    if (plan.empty_flag) {
      bundle.comparisons.push_back(std::move(res));
      continue;
    }
    ComparisonContext ctx;
    try {
      ctx = prepare_comparison(cohort, plan, bundle.strata, cfg);
    } catch (const std::exception& e) {
      throw NumericalError("propensity/distance (" + to_string(plan.id) +
                           "): " + e.what());
    }
    res.propensity_fit = ctx.propensity;

    KSelection sel = select_K(
        cfg.k_range, [&](int K) { return match_all_strata(ctx, K); },
        [&](const Matching& m) {
          return balance_criterion(ctx, values_by_outcome, m, cfg);
        },
        cfg.balance_threshold);
    res.K = sel.K;
    res.balanced = sel.balanced;
    res.max_abs_std_diff = sel.max_abs_std_diff;
    res.matching = std::move(sel.matching);
    res.balance = balance_table(res.matching, ctx.design, cfg.balance_threshold);
    res.composition = res.matching.composition();

    for (const auto& outcome : cfg.outcomes) {
      const OutcomeMap& values = values_by_outcome.at(outcome);
      Matching sub = filter_by_outcome(res.matching, values);
      if (sub.sets.empty()) continue;
      try {
        EffectEstimate est;
        if (outcome == "max_adult_bmi") {
          // Pre-match pooled SD of the outcome over this comparison.
          std::vector<double> ev, cv;
          for (size_t i = 0; i < ctx.design.row_ids.size(); ++i) {
            auto it = values.find(ctx.design.row_ids[i]);
            if (it == values.end()) continue;
            (ctx.exposed_flag[i] ? ev : cv).push_back(it->second);
          }
          double sd = pooled_sd(ev, cv);
          est = fixed_effects_ols(sub, values, sd > 0 ? sd : 1.0);
        } else {
          est = conditional_logistic(sub, values);
        }
        est.comparison = plan.id;
        est.outcome = outcome;
        res.estimates.push_back(est);
      } catch (const DataError&) {
        continue;  // no informative sets for this outcome
      }

      // Sensitivity bound for the same matched sets.
      if (outcome == "max_adult_bmi") {
        std::vector<std::string> matched_ids;
        for (const auto& set : sub.sets) {
          matched_ids.push_back(set.exposed_id);
          for (const auto& c : set.control_ids) matched_ids.push_back(c);
        }
        Eigen::VectorXd y(matched_ids.size());
        Eigen::MatrixXd Xm(matched_ids.size(), ctx.design.X.cols());
        bool ok = true;
        for (size_t i = 0; i < matched_ids.size(); ++i) {
          int row = ctx.design.row_of(matched_ids[i]);
          auto it = values.find(matched_ids[i]);
          if (row < 0 || it == values.end()) {
            ok = false;
            break;
          }
          y[static_cast<int>(i)] = it->second;
          Xm.row(static_cast<int>(i)) = ctx.design.X.row(row);
        }
        if (ok && matched_ids.size() > ctx.design.X.cols() + 2) {
          Eigen::VectorXd resid = residualize(y, Xm);
          std::map<std::string, double> rmap;
          for (size_t i = 0; i < matched_ids.size(); ++i)
            rmap[matched_ids[i]] = resid[static_cast<int>(i)];
          auto fn = [&, rmap, sub](double g) {
            return mtest_sensitivity(rmap, sub, g);
          };
          res.sensitivity[outcome] =
              sensitivity_curve(fn, gamma_grid(cfg), cfg.alpha);
        }
      } else {
        auto fn = [&, values, sub](double g) {
          return mh_sensitivity(sub, values, g);
        };
        res.sensitivity[outcome] =
            sensitivity_curve(fn, gamma_grid(cfg), cfg.alpha);
      }
    }
    bundle.comparisons.push_back(std::move(res));
  }

  // Ordered testing: the all-controls comparison gates the alternatives.
  for (const auto& outcome : cfg.outcomes) {
    const EffectEstimate* primary = nullptr;
    std::vector<EffectEstimate> alternatives;
    for (auto& comp : bundle.comparisons) {
      for (auto& est : comp.estimates) {
        if (est.outcome != outcome) continue;
        if (comp.plan.id == Comparison::fb_ac)
          primary = &est;
        else if (comp.plan.id == Comparison::fb_sc ||
                 comp.plan.id == Comparison::fb_nsc)
          alternatives.push_back(est);
      }
    }
    if (!primary) continue;
    double tau0 = primary->scale == EffectScale::odds_ratio ? cfg.tau0_or
                                                            : cfg.tau0_sd;
    OrderedTestResult r = ordered_test(*primary, alternatives, tau0, cfg.alpha);
    bundle.ordered[outcome] = r;
    for (auto& comp : bundle.comparisons)
      for (auto& est : comp.estimates) {
        if (est.outcome != outcome) continue;
        if (comp.plan.id == Comparison::fb_ac)
          est.multiplicity_flag = "ordered_procedure";
        else if ((comp.plan.id == Comparison::fb_sc ||
                  comp.plan.id == Comparison::fb_nsc) &&
                 r.alternatives_tested)
          est.multiplicity_flag = "ordered_procedure";
        else
          est.multiplicity_flag = "unadjusted";
      }
  }

  for (const auto& outcome : cfg.outcomes) {
    try {
      AttritionResult ar = attrition_analysis(cohort, outcome);
      for (const auto& row : ar.report) bundle.attrition.push_back(row);
    } catch (const NumericalError&) {
      AttritionRow row;
      row.outcome = outcome;
      row.term = "(degenerate availability)";
      bundle.attrition.push_back(row);
    }
  }

  if (!cfg.out_dir.empty()) write_report(bundle, cfg, cfg.out_dir);
  return bundle;
}

ReportBundle run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input_csv.empty() || cfg.schema_path.empty())
    throw ConfigError("config: input and schema paths are required");
  Schema schema = load_schema(cfg.schema_path);
  Cohort cohort = load_cohort(cfg.input_csv, schema);
  cohort = apply_eligibility(cohort, EligibilityRules::standard());
  cohort = code_outcomes(cohort);
  return run_pipeline_on(cohort, cfg);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_report(const ReportBundle& bundle, const RunConfig& cfg,
                  const std::string& out_dir) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["status"] = "complete";
  manifest["tables"] = json::array();
  auto note_table = [&](const std::string& file,
                        const std::vector<std::string>& columns, size_t rows) {
    manifest["tables"].push_back(
        {{"file", file}, {"columns", columns}, {"rows", rows}});
  };

  {
    // Table 1 layout: participation per sport plus group totals.
    std::vector<std::string> header = {"sport", "initial_pool",
                                       "eligible_football",
                                       "eligible_sport_controls"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& [sport, counts] : bundle.table1.sport_counts)
      rows.push_back({sport, std::to_string(counts[0]),
                      std::to_string(counts[1]), std::to_string(counts[2])});
    rows.push_back({"(eligible total)", std::to_string(bundle.table1.eligible),
                    std::to_string(bundle.table1.football),
                    std::to_string(bundle.table1.sport_controls +
                                   bundle.table1.nonsport_controls)});
    write_csv(out_dir + "/table1.csv", header, rows);
    note_table("table1.csv", header, rows.size());
  }
  {
    std::vector<std::string> header = {"stratum", "n_subjects"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& st : bundle.strata)
      rows.push_back({st.label(), std::to_string(st.subject_ids.size())});
    write_csv(out_dir + "/missingness.csv", header, rows);
    note_table("missingness.csv", header, rows.size());
  }
  {
    // Appendix layout: matched-set composition, one column per comparison.
    std::vector<std::string> header = {"composition"};
    for (const auto& c : bundle.comparisons)
      header.push_back(to_string(c.plan.id));
    int max_ratio = 1;
    for (const auto& c : bundle.comparisons)
      for (const auto& [k, n] : c.composition) max_ratio = std::max(max_ratio, k);
    std::vector<std::vector<std::string>> rows;
    for (int k = 1; k <= max_ratio; ++k) {
      std::vector<std::string> row = {"1:" + std::to_string(k)};
      for (const auto& c : bundle.comparisons) {
        auto it = c.composition.find(k);
        row.push_back(std::to_string(it == c.composition.end() ? 0 : it->second));
      }
      rows.push_back(row);
    }
    write_csv(out_dir + "/composition.csv", header, rows);
    note_table("composition.csv", header, rows.size());
  }
  for (const auto& c : bundle.comparisons) {
    if (c.plan.empty_flag) continue;
    std::string tag = to_string(c.plan.id);
    write_balance_csv(c.balance, out_dir + "/balance_" + tag + ".csv");
    note_table("balance_" + tag + ".csv",
               {"covariate", "exposed_before", "control_before",
                "exposed_after", "control_after", "std_diff_before",
                "std_diff_after", "flag_before", "flag_after"},
               c.balance.size());
    write_balance_markdown(c.balance, "exposed", "control",
                           out_dir + "/balance_" + tag + ".md");
    write_matching_csv(c.matching, out_dir + "/matching_" + tag + ".csv");
    for (const auto& [outcome, curve] : c.sensitivity)
      write_curve_csv(curve, out_dir + "/sensitivity_" + tag + "_" + outcome + ".csv");
  }
  {
    std::vector<EffectEstimate> all;
    for (const auto& c : bundle.comparisons)
      for (const auto& e : c.estimates) all.push_back(e);
    write_results_csv(all, out_dir + "/results.csv");
    note_table("results.csv",
               {"comparison", "outcome", "scale", "point", "ci_lo", "ci_hi",
                "p", "n_sets", "flag", "effect_size"},
               all.size());
  }
  {
    std::vector<std::string> header = {"outcome", "tau0", "primary_ci_lo",
                                       "primary_ci_hi", "alternatives_tested",
                                       "comparison", "decision"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& [outcome, r] : bundle.ordered) {
      if (r.decisions.empty())
        rows.push_back({outcome, fmt(r.tau0), fmt(r.primary_ci_lo),
                        fmt(r.primary_ci_hi),
                        r.alternatives_tested ? "1" : "0", "", ""});
      for (const auto& [comp, decision] : r.decisions)
        rows.push_back({outcome, fmt(r.tau0), fmt(r.primary_ci_lo),
                        fmt(r.primary_ci_hi),
                        r.alternatives_tested ? "1" : "0", comp, decision});
    }
    write_csv(out_dir + "/ordered_tests.csv", header, rows);
    note_table("ordered_tests.csv", header, rows.size());
  }
  {
    std::vector<std::string> header = {"outcome", "design", "term", "estimate",
                                       "se", "ci_lo", "ci_hi"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : bundle.attrition)
      rows.push_back({r.outcome, r.with_exposure ? "with_exposure" : "covariates_only",
                      r.term, fmt(r.estimate), fmt(r.se), fmt(r.ci_lo),
                      fmt(r.ci_hi)});
    write_csv(out_dir + "/attrition.csv", header, rows);
    note_table("attrition.csv", header, rows.size());
  }

  // Assembled Markdown report.
  {
    std::ofstream md(out_dir + "/report.md");
    md << "# Matched cohort analysis report\n\n";
    md << "## Cohort\n\n";
    md << "Eligible subjects: " << bundle.table1.eligible << " ("
       << fmt(bundle.table1.football_pct) << "% football, "
       << fmt(bundle.table1.control_pct) << "% controls; "
       << bundle.table1.sport_controls << " sport controls, "
       << bundle.table1.nonsport_controls << " non-sport controls).\n\n";
    md << "## Matching\n\n";
    for (const auto& c : bundle.comparisons) {
      md << "- " << to_string(c.plan.id);
      if (c.plan.empty_flag) {
        md << ": skipped (required group absent)\n";
        continue;
      }
      md << ": K=" << c.K << ", " << c.matching.sets.size() << " sets, max |std diff| "
         << fmt(c.max_abs_std_diff) << (c.balanced ? "" : " (UNBALANCED)") << "\n";
    }
    md << "\n## Effect estimates\n\n";
    md << "| Comparison | Outcome | Scale | Estimate | 95% CI | p | Sets | Flag |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : bundle.comparisons)
      for (const auto& e : c.estimates)
        md << "| " << to_string(e.comparison) << " | " << e.outcome << " | "
           << (e.scale == EffectScale::odds_ratio ? "OR" : "SD") << " | "
           << fmt(e.point) << " | (" << fmt(e.ci_lo) << ", " << fmt(e.ci_hi)
           << ") | " << fmt(e.p_value) << " | " << e.n_sets << " | "
           << e.multiplicity_flag << " |\n";
    md << "\n## Sensitivity\n\n";
    for (const auto& c : bundle.comparisons)
      for (const auto& [outcome, curve] : c.sensitivity) {
        md << "- " << to_string(c.plan.id) << " / " << outcome << ": gamma* = ";
        if (std::isinf(curve.gamma_star))
          md << "> 20";
        else
          md << fmt(curve.gamma_star);
        if (curve.insignificant_at_one) md << " (insignificant at gamma = 1)";
        md << "\n";
      }
    md << "\n";
  }

  std::ofstream mf(out_dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';
}

}  // namespace cmatch
