#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cmatch/errors.hpp"
#include "cmatch/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cmatch;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string comparison = "all";
  std::string outcome;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig resolve_config(const CommonArgs& args) {
  if (args.config_path.empty())
    throw ConfigError("--config PATH is required (try `cohort-matcher init`)");
  RunConfig cfg = load_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.comparison != "all")
    cfg.comparisons = {comparison_from_string(args.comparison)};
  if (!args.outcome.empty()) {
    if (std::find(cfg.outcomes.begin(), cfg.outcomes.end(), args.outcome) ==
        cfg.outcomes.end())
      throw ConfigError("--outcome " + args.outcome + " not in config outcomes");
    cfg.outcomes = {args.outcome};
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file");
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--comparison", args.comparison,
                  "fb-ac, fb-sc, fb-nsc, sc-nsc, or all")
      ->check(CLI::IsMember({"fb-ac", "fb-sc", "fb-nsc", "sc-nsc", "all"}));
  cmd->add_option("--outcome", args.outcome, "restrict to a single outcome");
  cmd->add_option("--seed", args.seed, "random seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matched observational-study pipeline: eligibility, "
               "propensity scores, optimal variable-ratio matching, balance "
               "diagnostics, matched-set estimation, and sensitivity bounds"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* init = app.add_subcommand("init", "write config and schema templates");
  std::string init_dir = ".";
  init->add_option("--out", init_dir, "directory for the templates");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  int sim_n = 2000;
  double sim_conf = 0.5;
  simulate->add_option("--n", sim_n, "number of subjects");
  simulate->add_option("--confounding", sim_conf, "confounding strength");
  add_common(simulate, args);

  auto* match = app.add_subcommand("match", "run matching and write matched sets");
  add_common(match, args);
  auto* balance = app.add_subcommand("balance", "matching plus balance tables");
  add_common(balance, args);
  auto* estimate = app.add_subcommand("estimate", "matched-set effect estimates");
  add_common(estimate, args);
  auto* sensitivity = app.add_subcommand("sensitivity", "gamma sensitivity curves");
  add_common(sensitivity, args);
  auto* attrition = app.add_subcommand("attrition", "outcome-availability models");
  add_common(attrition, args);
  auto* run = app.add_subcommand("run", "full pipeline and report bundle");
  add_common(run, args);
  auto* report = app.add_subcommand("report", "regenerate the report bundle");
  add_common(report, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      fs::create_directories(init_dir);
      save_config_template(init_dir + "/config.json");
      SyntheticSpec spec;
      SyntheticData data = generate_synthetic(spec, 1);
      save_schema(data.schema, init_dir + "/schema.json");
      std::cout << "wrote " << init_dir << "/config.json and " << init_dir
                << "/schema.json\n";
      return 0;
    }
    if (simulate->parsed()) {
      RunConfig cfg = resolve_config(args);
      SyntheticSpec spec;
      spec.n = sim_n;
      spec.confounding = sim_conf;
      // Mirror the configured outcomes with mild missingness.
      for (const auto& o : cfg.outcomes) spec.missing_rates[o] = 0.1;
      SyntheticData data = generate_synthetic(spec, cfg.seed);
      write_synthetic(data, cfg.input_csv, cfg.schema_path);
      std::cout << "wrote " << cfg.input_csv << " (" << spec.n
                << " subjects) and " << cfg.schema_path << "\n";
      return 0;
    }

    RunConfig cfg = resolve_config(args);
    ReportBundle bundle = run_pipeline(cfg);
    if (match->parsed() || balance->parsed()) {
      for (const auto& c : bundle.comparisons) {
        if (c.plan.empty_flag) {
          std::cout << to_string(c.plan.id) << ": skipped (group absent)\n";
          continue;
        }
        std::cout << to_string(c.plan.id) << ": K=" << c.K << ", "
                  << c.matching.sets.size() << " sets, max |std diff| after = "
                  << c.max_abs_std_diff << (c.balanced ? "" : " (UNBALANCED)")
                  << "\n";
      }
    }
    if (estimate->parsed()) {
      for (const auto& c : bundle.comparisons)
        for (const auto& e : c.estimates)
          std::printf("%s %s: %s %.4f (%.4f, %.4f) p=%.4g [%s]\n",
                      to_string(e.comparison).c_str(), e.outcome.c_str(),
                      e.scale == EffectScale::odds_ratio ? "OR" : "SD",
                      e.point, e.ci_lo, e.ci_hi, e.p_value,
                      e.multiplicity_flag.c_str());
    }
    if (sensitivity->parsed()) {
      for (const auto& c : bundle.comparisons)
        for (const auto& [outcome, curve] : c.sensitivity)
          std::printf("%s %s: gamma* = %s\n", to_string(c.plan.id).c_str(),
                      outcome.c_str(),
                      std::isinf(curve.gamma_star)
                          ? "> 20"
                          : std::to_string(curve.gamma_star).c_str());
    }
    if (attrition->parsed()) {
      for (const auto& r : bundle.attrition)
        std::printf("%s [%s] %s: %.4f (%.4f, %.4f)\n", r.outcome.c_str(),
                    r.with_exposure ? "with exposure" : "covariates only",
                    r.term.c_str(), r.estimate, r.ci_lo, r.ci_hi);
    }
    if (run->parsed() || report->parsed())
      std::cout << "report bundle written to " << cfg.out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
