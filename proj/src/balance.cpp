#include "cmatch/balance.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "cmatch/csv.hpp"
#include "cmatch/errors.hpp"

namespace cmatch {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / (v.size() - 1);
}

}  // namespace

double pooled_sd(const std::vector<double>& e, const std::vector<double>& c) {
  return std::sqrt(0.5 * (variance(e) + variance(c)));
}

double std_diff(const std::vector<double>& e, const std::vector<double>& c,
                const std::vector<double>& w, double pooled) {
  if (e.empty() || c.empty())
    throw ConfigError("std_diff: empty group");
  if (w.size() != c.size())
    throw ConfigError("std_diff: weight length mismatch");
  double wsum = 0, cw = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    if (w[i] < 0) throw ConfigError("std_diff: negative weight");
    wsum += w[i];
    cw += w[i] * c[i];
  }
  if (wsum == 0) throw ConfigError("std_diff: all-zero weights");
  double diff = mean(e) - cw / wsum;
  if (pooled == 0)
    return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / pooled;
}

double weighted_control_mean(const Matching& matching,
                             const std::map<std::string, double>& values) {
  if (matching.sets.empty())
    throw ConfigError("weighted_control_mean: empty matching");
  double total = 0;
  for (const auto& set : matching.sets) {
    double s = 0;
    for (const auto& c : set.control_ids) {
      auto it = values.find(c);
      if (it == values.end())
        throw DataError("weighted_control_mean: no value for control " + c);
      s += it->second;
    }
    total += s / set.control_ids.size();
  }
  return total / matching.sets.size();
}

std::vector<BalanceRow> balance_table(const Matching& matching,
                                      const Design& design, double threshold) {
  std::vector<BalanceRow> rows;
  const int n = static_cast<int>(design.row_ids.size());

  // After-match membership and weights: exposed weight 1, controls
  // 1/(set size - 1), looked up by subject id.
  std::map<std::string, double> control_weight;
  std::map<std::string, bool> exposed_matched;
  for (const auto& set : matching.sets) {
    exposed_matched[set.exposed_id] = true;
    for (const auto& c : set.control_ids)
      control_weight[c] = 1.0 / set.control_ids.size();
  }

  for (size_t col = 0; col < design.columns.size(); ++col) {
    BalanceRow row;
    row.covariate = design.columns[col];
    std::vector<double> e_before, c_before;
    std::vector<double> e_after;
    std::vector<double> c_after, c_after_w;
    for (int i = 0; i < n; ++i) {
      double v = design.X(i, static_cast<int>(col));
      if (design.exposed[i]) {
        e_before.push_back(v);
        if (exposed_matched.count(design.row_ids[i])) e_after.push_back(v);
      } else {
        c_before.push_back(v);
        auto it = control_weight.find(design.row_ids[i]);
        if (it != control_weight.end()) {
          c_after.push_back(v);
          c_after_w.push_back(it->second);
        }
      }
    }
    double pooled = pooled_sd(e_before, c_before);
    std::vector<double> ones_before(c_before.size(), 1.0);
    row.exposed_before = mean(e_before);
    row.control_before = mean(c_before);
    row.std_diff_before = std_diff(e_before, c_before, ones_before, pooled);
    if (!e_after.empty() && !c_after.empty()) {
      double wsum = 0, cw = 0;
      for (size_t i = 0; i < c_after.size(); ++i) {
        wsum += c_after_w[i];
        cw += c_after_w[i] * c_after[i];
      }
      row.exposed_after = mean(e_after);
      row.control_after = cw / wsum;
      row.std_diff_after = std_diff(e_after, c_after, c_after_w, pooled);
    } else {
      row.exposed_after = row.exposed_before;
      row.control_after = row.control_before;
      row.std_diff_after = row.std_diff_before;
    }
    row.flag_before = std::abs(row.std_diff_before) >= threshold;
    row.flag_after = std::abs(row.std_diff_after) >= threshold;
    rows.push_back(std::move(row));
  }
  return rows;
}

double max_abs_std_diff_after(const std::vector<BalanceRow>& rows) {
  double m = 0;
  for (const auto& r : rows) m = std::max(m, std::abs(r.std_diff_after));
  return m;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_balance_csv(const std::vector<BalanceRow>& rows,
                       const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows)
    out.push_back({r.covariate, fmt(r.exposed_before), fmt(r.control_before),
                   fmt(r.exposed_after), fmt(r.control_after),
                   fmt(r.std_diff_before), fmt(r.std_diff_after),
                   r.flag_before ? "1" : "0", r.flag_after ? "1" : "0"});
  write_csv(path,
            {"covariate", "exposed_before", "control_before", "exposed_after",
             "control_after", "std_diff_before", "std_diff_after",
             "flag_before", "flag_after"},
            out);
}

void write_balance_markdown(const std::vector<BalanceRow>& rows,
                            const std::string& exposed_label,
                            const std::string& control_label,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write balance table: " + path);
  out << "| Variable | " << exposed_label << " (before) | " << control_label
      << " (before) | " << exposed_label << " (after) | " << control_label
      << " (after) | Std. Diff. Before | Std. Diff. After |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    auto sd = [&](double v, bool flag) {
      std::string s = fmt(v);
      return flag ? "**" + s + "**" : s;
    };
    out << "| " << r.covariate << " | " << fmt(r.exposed_before) << " | "
        << fmt(r.control_before) << " | " << fmt(r.exposed_after) << " | "
        << fmt(r.control_after) << " | " << sd(r.std_diff_before, r.flag_before)
        << " | " << sd(r.std_diff_after, r.flag_after) << " |\n";
  }
}

}  // namespace cmatch
