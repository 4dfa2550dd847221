#include "cmatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmatch/csv.hpp"
#include "cmatch/errors.hpp"
#include "cmatch/min_cost_flow.hpp"

namespace cmatch {

namespace {

constexpr double kCostScale = 1e6;  // distances -> integer costs

std::int64_t scaled(double d) {
  return static_cast<std::int64_t>(std::llround(d * kCostScale));
}

// Row/column orders sorted by subject id, for deterministic tie-breaking.
std::vector<int> sorted_order(const std::vector<std::string>& ids) {
  std::vector<int> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ids[a] < ids[b]; });
  return order;
}

}  // namespace

int Matching::matched_subjects() const {
  int n = 0;
  for (const auto& s : sets) n += 1 + static_cast<int>(s.control_ids.size());
  return n;
}

void Matching::append(Matching other) {
  for (auto& s : other.sets) sets.push_back(std::move(s));
  for (auto& id : other.discarded_exposed) discarded_exposed.push_back(std::move(id));
  for (auto& id : other.discarded_controls) discarded_controls.push_back(std::move(id));
  total_distance += other.total_distance;
}

std::map<int, int> Matching::composition() const {
  std::map<int, int> out;
  for (const auto& s : sets) ++out[static_cast<int>(s.control_ids.size())];
  return out;
}

Matching optimal_assignment(const DistanceMatrix& dm, int k) {
  const int E = static_cast<int>(dm.exposed_ids.size());
  const int C = static_cast<int>(dm.control_ids.size());
  Matching m;
  if (E == 0) {
    for (const auto& c : dm.control_ids) m.discarded_controls.push_back(c);
    return m;
  }
  if (C < E)
    throw ConfigError("optimal_assignment: fewer controls than exposed");
  // Spill rule: a deficient block drops to the largest feasible ratio.
  int ratio = std::min(k, C / E);

  auto erow = sorted_order(dm.exposed_ids);
  auto crow = sorted_order(dm.control_ids);

  const int source = 0, sink = E + C + 1;
  MinCostFlow g(E + C + 2);
  for (int i = 0; i < E; ++i) g.add_edge(source, 1 + i, ratio, 0);
  std::vector<std::vector<int>> pair_edges(E, std::vector<int>(C));
  for (int i = 0; i < E; ++i)
    for (int j = 0; j < C; ++j)
      pair_edges[i][j] = g.add_edge(1 + i, 1 + E + j, 1,
                                    scaled(dm.entries(erow[i], crow[j])));
  for (int j = 0; j < C; ++j) g.add_edge(1 + E + j, sink, 1, 0);

  auto [flow, cost] = g.solve(source, sink, E * ratio);
  if (flow < E * ratio)
    throw NumericalError("optimal_assignment: infeasible flow instance");

  std::vector<bool> control_used(C, false);
  for (int i = 0; i < E; ++i) {
    MatchedSet set;
    set.exposed_id = dm.exposed_ids[erow[i]];
    set.block_k = k;
    for (int j = 0; j < C; ++j) {
      if (g.flow_on(pair_edges[i][j]) > 0) {
        set.control_ids.push_back(dm.control_ids[crow[j]]);
        control_used[j] = true;
        m.total_distance += dm.entries(erow[i], crow[j]);
      }
    }
    std::sort(set.control_ids.begin(), set.control_ids.end());
    m.sets.push_back(std::move(set));
  }
  for (int j = 0; j < C; ++j)
    if (!control_used[j]) m.discarded_controls.push_back(dm.control_ids[crow[j]]);
  return m;
}

Matching pair_match_discard(const DistanceMatrix& dm) {
  const int E = static_cast<int>(dm.exposed_ids.size());
  const int C = static_cast<int>(dm.control_ids.size());
  Matching m;
  if (C == 0) {
    for (const auto& e : dm.exposed_ids) m.discarded_exposed.push_back(e);
    return m;
  }

  auto erow = sorted_order(dm.exposed_ids);
  auto crow = sorted_order(dm.control_ids);

  const int source = 0, sink = E + C + 1;
  MinCostFlow g(E + C + 2);
  for (int i = 0; i < E; ++i) g.add_edge(source, 1 + i, 1, 0);
  std::vector<std::vector<int>> pair_edges(E, std::vector<int>(C));
  for (int i = 0; i < E; ++i)
    for (int j = 0; j < C; ++j)
      pair_edges[i][j] = g.add_edge(1 + i, 1 + E + j, 1,
                                    scaled(dm.entries(erow[i], crow[j])));
  for (int j = 0; j < C; ++j) g.add_edge(1 + E + j, sink, 1, 0);

  const int want = std::min(E, C);
  auto [flow, cost] = g.solve(source, sink, want);
  if (flow < want)
    throw NumericalError("pair_match_discard: infeasible flow instance");

  for (int i = 0; i < E; ++i) {
    bool matched = false;
    for (int j = 0; j < C; ++j) {
      if (g.flow_on(pair_edges[i][j]) > 0) {
        MatchedSet set;
        set.exposed_id = dm.exposed_ids[erow[i]];
        set.control_ids = {dm.control_ids[crow[j]]};
        set.block_k = 1;
        m.total_distance += dm.entries(erow[i], crow[j]);
        m.sets.push_back(std::move(set));
        matched = true;
      }
    }
    if (!matched) m.discarded_exposed.push_back(dm.exposed_ids[erow[i]]);
  }
  return m;
}

int propensity_block(double score, int max_ratio) {
  if (score <= 0.0 || score > 1.0)
    throw ConfigError("propensity_block: score outside (0, 1]");
  int k = static_cast<int>(std::floor(1.0 / score + 1e-12));
  return std::clamp(k, 1, max_ratio);
}

Matching variable_ratio_match(const DistanceMatrix& dm,
                              const std::vector<double>& exposed_scores,
                              const std::vector<double>& control_scores,
                              int max_ratio, const std::string& stratum) {
  if (max_ratio < 2)
    throw ConfigError("variable_ratio_match: max ratio must be >= 2");
  if (exposed_scores.size() != dm.exposed_ids.size() ||
      control_scores.size() != dm.control_ids.size())
    throw ConfigError("variable_ratio_match: score length mismatch");

  Matching out;
  for (int k = 1; k <= max_ratio; ++k) {
    std::vector<int> erows, crows;
    for (size_t i = 0; i < exposed_scores.size(); ++i)
      if (propensity_block(exposed_scores[i], max_ratio) == k)
        erows.push_back(static_cast<int>(i));
    for (size_t j = 0; j < control_scores.size(); ++j)
      if (propensity_block(control_scores[j], max_ratio) == k)
        crows.push_back(static_cast<int>(j));
    if (erows.empty() && crows.empty()) continue;

    DistanceMatrix sub;
    for (int i : erows) sub.exposed_ids.push_back(dm.exposed_ids[i]);
    for (int j : crows) sub.control_ids.push_back(dm.control_ids[j]);
    sub.entries.resize(erows.size(), crows.size());
    for (size_t a = 0; a < erows.size(); ++a)
      for (size_t b = 0; b < crows.size(); ++b)
        sub.entries(a, b) = dm.entries(erows[a], crows[b]);

    Matching block;
    if (erows.empty()) {
      for (const auto& c : sub.control_ids) block.discarded_controls.push_back(c);
    } else if (crows.empty()) {
      for (const auto& e : sub.exposed_ids) block.discarded_exposed.push_back(e);
    } else if (erows.size() > crows.size()) {
      block = pair_match_discard(sub);
    } else {
      block = optimal_assignment(sub, k);
    }
    for (auto& s : block.sets) {
      s.stratum = stratum;
      s.block_k = k;
    }
    out.append(std::move(block));
  }
  return out;
}

KSelection select_K(const std::vector<int>& k_range,
                    const std::function<Matching(int)>& match,
                    const std::function<double(const Matching&)>& max_std_diff,
                    double threshold) {
  if (k_range.empty()) throw ConfigError("select_K: empty K range");
  KSelection best_balanced;
  KSelection best_any;
  bool have_balanced = false, have_any = false;
  for (int K : k_range) {
    KSelection cur;
    cur.K = K;
    cur.matching = match(K);
    cur.max_abs_std_diff = max_std_diff(cur.matching);
    cur.balanced = cur.max_abs_std_diff < threshold;
    if (!have_any || cur.max_abs_std_diff < best_any.max_abs_std_diff) {
      best_any = cur;
      have_any = true;
    }
    if (cur.balanced) {
      int n_cur = cur.matching.matched_subjects();
      int n_best = best_balanced.matching.matched_subjects();
      if (!have_balanced || n_cur > n_best ||
          (n_cur == n_best && K < best_balanced.K)) {
        best_balanced = cur;
        have_balanced = true;
      }
    }
  }
  return have_balanced ? best_balanced : best_any;
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::fb_ac: return "fb-ac";
    case Comparison::fb_sc: return "fb-sc";
    case Comparison::fb_nsc: return "fb-nsc";
    case Comparison::sc_nsc: return "sc-nsc";
  }
  return "fb-ac";
}

Comparison comparison_from_string(const std::string& s) {
  if (s == "fb-ac") return Comparison::fb_ac;
  if (s == "fb-sc") return Comparison::fb_sc;
  if (s == "fb-nsc") return Comparison::fb_nsc;
  if (s == "sc-nsc") return Comparison::sc_nsc;
  throw ConfigError("unknown comparison: " + s);
}

std::vector<ComparisonPlan> build_comparisons(const Cohort& cohort) {
  bool have_fb = false, have_sc = false, have_nsc = false;
  for (const auto& s : cohort.subjects) {
    if (s.group == Group::football) have_fb = true;
    if (s.group == Group::sport_control) have_sc = true;
    if (s.group == Group::nonsport_control) have_nsc = true;
  }
  std::vector<ComparisonPlan> plans(4);
  plans[0] = {Comparison::fb_ac, Group::football,
              {Group::sport_control, Group::nonsport_control},
              !have_fb || (!have_sc && !have_nsc)};
  plans[1] = {Comparison::fb_sc, Group::football, {Group::sport_control},
              !have_fb || !have_sc};
  plans[2] = {Comparison::fb_nsc, Group::football, {Group::nonsport_control},
              !have_fb || !have_nsc};
  // Sport controls take the exposed role in the fourth comparison.
  plans[3] = {Comparison::sc_nsc, Group::sport_control,
              {Group::nonsport_control}, !have_sc || !have_nsc};
  return plans;
}

void write_matching_csv(const Matching& m, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  int set_id = 0;
  for (const auto& s : m.sets) {
    ++set_id;
    rows.push_back({std::to_string(set_id), "exposed", s.exposed_id,
                    std::to_string(s.block_k), s.stratum});
    for (const auto& c : s.control_ids)
      rows.push_back({std::to_string(set_id), "control", c,
                      std::to_string(s.block_k), s.stratum});
  }
  for (const auto& e : m.discarded_exposed)
    rows.push_back({"", "discarded_exposed", e, "", ""});
  for (const auto& c : m.discarded_controls)
    rows.push_back({"", "discarded_control", c, "", ""});
  write_csv(path, {"set_id", "role", "subject_id", "block_k", "stratum"}, rows);
}

}  // namespace cmatch
