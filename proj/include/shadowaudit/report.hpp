// Copyright 2026 The shadow-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowaudit/error.hpp"
#include "shadowaudit/experiments.hpp"
#include "shadowaudit/graph.hpp"
#include "shadowaudit/metrics.hpp"
#include "shadowaudit/netgen.hpp"

namespace shadowaudit {

inline constexpr const char* kToolName = "shadow-audit";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

namespace detail {

/// Shortest round-trip decimal form; identical bits give identical text.
inline std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) fail(ErrorCode::IoError, "double formatting failed");
  return std::string(buf, ptr);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open for write: " + path);
  f << text;
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config serialization.

inline nlohmann::json forest_config_json(const ForestConfig& cfg) {
  return {
      {"n_trees", cfg.n_trees},
      {"max_depth",
       cfg.max_depth ? nlohmann::json(*cfg.max_depth) : nlohmann::json(nullptr)},
      {"min_samples_split", cfg.min_samples_split},
      {"mtry", cfg.mtry ? nlohmann::json(*cfg.mtry) : nlohmann::json(nullptr)},
      {"seed", cfg.seed},
  };
}

inline ForestConfig forest_config_from_json(const nlohmann::json& j) {
  ForestConfig cfg;
  if (j.contains("n_trees")) cfg.n_trees = j.at("n_trees").get<int>();
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
    cfg.max_depth = j.at("max_depth").get<int>();
  }
  if (j.contains("min_samples_split")) {
    cfg.min_samples_split = j.at("min_samples_split").get<int>();
  }
  if (j.contains("mtry") && !j.at("mtry").is_null()) cfg.mtry = j.at("mtry").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline nlohmann::json partial_config_json(const PartialConfig& cfg) {
  return {
      {"protocol", "partial"},
      {"R_grid", cfg.R_grid},
      {"runs_per_R", cfg.runs_per_R},
      {"seed", cfg.seed},
      {"reference_year", cfg.reference_year},
      {"xw_count_link", cfg.xw_count_link},
      {"forest", forest_config_json(cfg.forest)},
  };
}

inline nlohmann::json full_config_json(const FullConfig& cfg) {
  return {
      {"protocol", "full"},
      {"a_grid", cfg.a_grid},
      {"rho_grid", cfg.rho_grid},
      {"runs_per_pair", cfg.runs_per_pair},
      {"seed", cfg.seed},
      {"reference_year", cfg.reference_year},
      {"xw_count_link", cfg.xw_count_link},
      {"collect_records", cfg.collect_records},
      {"forest", forest_config_json(cfg.forest)},
  };
}

inline nlohmann::json gen_config_json(const GenConfig& cfg) {
  nlohmann::json proportions;
  for (OrientationClass c : kAllClasses) {
    proportions[to_string(c)] = cfg.class_proportions[static_cast<std::size_t>(c)];
  }
  return {
      {"n", cfg.n},
      {"class_proportions", proportions},
      {"mean_degree", cfg.mean_degree},
      {"homophily", cfg.homophily},
      {"seed", cfg.seed},
      {"age_range", {cfg.age_range.first, cfg.age_range.second}},
  };
}

// ---------------------------------------------------------------------------
// Report JSON.

namespace detail {

inline nlohmann::json graph_summary_json(const SocialGraph& g) {
  auto [counts, unclassed] = class_counts(g);
  nlohmann::json jc;
  for (OrientationClass c : kAllClasses) {
    jc[to_string(c)] = counts[static_cast<std::size_t>(c)];
  }
  nlohmann::json out = {
      {"nodes", g.num_users()},
      {"edges", g.num_edges()},
      {"mean_degree", g.mean_degree()},
      {"class_counts", jc},
      {"unclassed_nodes", unclassed},
  };
  try {
    out["assortative_fraction"] = assortative_edge_fraction(g);
  } catch (const AuditError&) {
    out["assortative_fraction"] = nullptr;
  }
  return out;
}

inline nlohmann::json class_scores_json(const ClassScores& scores) {
  nlohmann::json per;
  for (OrientationClass c : kAllClasses) {
    const ClassScore& s = scores.per_class[static_cast<std::size_t>(c)];
    per[to_string(c)] = {
        {"precision", s.precision}, {"recall", s.recall},   {"base_rate", s.base_rate},
        {"kappa", s.kappa},         {"subjects", s.subjects},
    };
  }
  return {{"mean_kappa", scores.mean_kappa}, {"per_class", per}};
}

inline nlohmann::json confusion_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json unclassified = nlohmann::json::array();
  for (OrientationClass t : kAllClasses) {
    nlohmann::json row = nlohmann::json::array();
    for (OrientationClass p : kAllClasses) row.push_back(cm.count(t, p));
    rows.push_back(std::move(row));
    unclassified.push_back(cm.unclassified(t));
  }
  return {{"counts", std::move(rows)}, {"unclassified", std::move(unclassified)}};
}

inline nlohmann::json run_json(const RunResult& r) {
  nlohmann::json j = {
      {"protocol", r.protocol},
      {"run", r.run_index},
      {"skipped", r.skipped},
  };
  if (r.protocol == "partial") {
    j["R"] = r.R;
  } else {
    j["a"] = r.a;
    j["rho"] = r.rho;
  }
  if (r.skipped) {
    j["skip_reason"] = r.skip_reason;
    return j;
  }
  j["counts"] = {
      {"training", r.training_count},
      {"test", r.test_count},
      {"unreachable", r.unreachable_count},
  };
  j["multiclass_kappa"] =
      r.multiclass_kappa ? nlohmann::json(*r.multiclass_kappa) : nlohmann::json(nullptr);
  j["scores"] = class_scores_json(r.scores);
  j["confusion"] = confusion_json(r.cm);
  return j;
}

}  // namespace detail

/// Inverse of the per-run report entry, for merging reports back into runs.
inline RunResult run_result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.protocol = j.at("protocol").get<std::string>();
  r.run_index = j.at("run").get<int>();
  r.skipped = j.at("skipped").get<bool>();
  if (r.protocol == "partial") {
    r.R = j.at("R").get<double>();
  } else if (r.protocol == "full") {
    r.a = j.at("a").get<double>();
    r.rho = j.at("rho").get<double>();
  } else {
    fail(ErrorCode::ParseError, "unknown protocol in run entry: " + r.protocol);
  }
  if (r.skipped) {
    r.skip_reason = j.at("skip_reason").get<std::string>();
    return r;
  }
  const auto& counts = j.at("counts");
  r.training_count = counts.at("training").get<std::uint64_t>();
  r.test_count = counts.at("test").get<std::uint64_t>();
  r.unreachable_count = counts.at("unreachable").get<std::uint64_t>();
  if (!j.at("multiclass_kappa").is_null()) {
    r.multiclass_kappa = j.at("multiclass_kappa").get<double>();
  }
  const auto& scores = j.at("scores");
  r.scores.mean_kappa = scores.at("mean_kappa").get<double>();
  for (OrientationClass c : kAllClasses) {
    const auto& s = scores.at("per_class").at(to_string(c));
    ClassScore& dst = r.scores.per_class[static_cast<std::size_t>(c)];
    dst.precision = s.at("precision").get<double>();
    dst.recall = s.at("recall").get<double>();
    dst.base_rate = s.at("base_rate").get<double>();
    dst.kappa = s.at("kappa").get<double>();
    dst.subjects = s.at("subjects").get<std::uint64_t>();
  }
  const auto& cm = j.at("confusion");
  for (OrientationClass t : kAllClasses) {
    const auto& row = cm.at("counts").at(static_cast<std::size_t>(t));
    for (OrientationClass p : kAllClasses) {
      std::uint64_t n = row.at(static_cast<std::size_t>(p)).get<std::uint64_t>();
      if (n > 0) r.cm.add(t, p, n);
    }
    std::uint64_t u =
        cm.at("unclassified").at(static_cast<std::size_t>(t)).get<std::uint64_t>();
    if (u > 0) r.cm.add_unclassified(t, u);
  }
  return r;
}

namespace detail {

inline nlohmann::json leak_json(const LeakFactorEstimate& est) {
  return {
      {"slope", est.slope},         {"intercept", est.intercept},
      {"std_error", est.std_error}, {"t_stat", est.t_stat},
      {"p_value", est.p_value},     {"n_points", est.n_points},
      {"perfect_fit", est.perfect_fit},
  };
}

inline nlohmann::json leak_set_json(const LeakFactorSet& set) {
  nlohmann::json j;
  j["mean_kappa"] =
      set.mean_kappa ? leak_json(*set.mean_kappa) : nlohmann::json(nullptr);
  nlohmann::json per;
  for (OrientationClass c : kAllClasses) {
    const auto& est = set.per_class[static_cast<std::size_t>(c)];
    per[to_string(c)] = est ? leak_json(*est) : nlohmann::json(nullptr);
  }
  j["per_class"] = per;
  return j;
}

inline nlohmann::json report_common(const SocialGraph& g, const nlohmann::json& config,
                                    const nlohmann::json& graph_source) {
  nlohmann::json classes = nlohmann::json::array();
  for (OrientationClass c : kAllClasses) classes.push_back(to_string(c));
  return {
      {"format_version", kReportFormatVersion},
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"rng", kRngAlgorithm},
      {"classes", classes},
      {"config", config},
      {"graph_source", graph_source},
      {"graph", graph_summary_json(g)},
  };
}

}  // namespace detail

/// Fully deterministic partial-protocol report: no timings, no host facts.
inline nlohmann::json partial_report_json(const SocialGraph& g, const PartialConfig& cfg,
                                          const PartialOutcome& outcome,
                                          const nlohmann::json& graph_source) {
  nlohmann::json j =
      detail::report_common(g, partial_config_json(cfg), graph_source);
  nlohmann::json runs = nlohmann::json::array();
  std::size_t skipped = 0;
  for (const RunResult& r : outcome.runs) {
    runs.push_back(detail::run_json(r));
    skipped += r.skipped;
  }
  j["runs"] = std::move(runs);
  j["leak_factors"] = detail::leak_set_json(outcome.leak);
  j["trend"] = outcome.trend
                   ? nlohmann::json{{"spearman_rho", outcome.trend->rho},
                                    {"p_value", outcome.trend->p_value},
                                    {"n_points", outcome.trend->n_points}}
                   : nlohmann::json(nullptr);
  j["runtime"] = {{"runs_total", outcome.runs.size()}, {"runs_skipped", skipped}};
  return j;
}

inline nlohmann::json full_report_json(const SocialGraph& g, const FullConfig& cfg,
                                       const FullOutcome& outcome,
                                       const nlohmann::json& graph_source) {
  nlohmann::json j = detail::report_common(g, full_config_json(cfg), graph_source);
  nlohmann::json runs = nlohmann::json::array();
  std::size_t skipped = 0;
  for (const RunResult& r : outcome.runs) {
    runs.push_back(detail::run_json(r));
    skipped += r.skipped;
  }
  j["runs"] = std::move(runs);
  nlohmann::json per_rho = nlohmann::json::array();
  for (const auto& [rho, set] : outcome.per_rho) {
    per_rho.push_back({{"rho", rho}, {"leak_factors", detail::leak_set_json(set)}});
  }
  j["per_rho_leak_factors"] = std::move(per_rho);
  j["records_count"] = outcome.records.size();
  j["runtime"] = {{"runs_total", outcome.runs.size()}, {"runs_skipped", skipped}};
  return j;
}

/// Wall-clock sidecar, intentionally separate: reports must stay
/// byte-identical across reruns and job counts, wall time never is.
inline nlohmann::json timings_json(const std::vector<RunResult>& runs, int jobs,
                                   double total_seconds) {
  nlohmann::json per_run = nlohmann::json::array();
  for (const RunResult& r : runs) per_run.push_back(r.duration_seconds);
  return {
      {"jobs", jobs},
      {"total_seconds", total_seconds},
      {"per_run_seconds", std::move(per_run)},
  };
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  detail::write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV emitters (all doubles in shortest round-trip form).

namespace detail {

inline void append_class_kappas(std::string& line, const RunResult& r) {
  for (OrientationClass c : kDisclosingClasses) {
    const ClassScore& s = r.scores.per_class[static_cast<std::size_t>(c)];
    line += ',';
    if (s.subjects > 0) line += fmt_double(s.kappa);
  }
}

}  // namespace detail

inline void write_kappa_vs_r_csv(const std::string& path,
                                 const std::vector<RunResult>& runs) {
  std::string text = "R,run,mean_kappa,multiclass_kappa";
  for (OrientationClass c : kDisclosingClasses) {
    text += std::string(",kappa_") + to_string(c);
  }
  text += '\n';
  for (const RunResult& r : runs) {
    if (r.skipped) continue;
    std::string line = detail::fmt_double(r.R) + ',' + std::to_string(r.run_index) +
                       ',' + detail::fmt_double(r.scores.mean_kappa) + ',';
    if (r.multiclass_kappa) line += detail::fmt_double(*r.multiclass_kappa);
    detail::append_class_kappas(line, r);
    text += line + '\n';
  }
  detail::write_text_file(path, text);
}

inline void write_kappa_vs_a_csv(const std::string& path,
                                 const std::vector<RunResult>& runs) {
  std::string text = "a,rho,run,mean_kappa,multiclass_kappa";
  for (OrientationClass c : kDisclosingClasses) {
    text += std::string(",kappa_") + to_string(c);
  }
  text += '\n';
  for (const RunResult& r : runs) {
    if (r.skipped) continue;
    std::string line = detail::fmt_double(r.a) + ',' + detail::fmt_double(r.rho) + ',' +
                       std::to_string(r.run_index) + ',' +
                       detail::fmt_double(r.scores.mean_kappa) + ',';
    if (r.multiclass_kappa) line += detail::fmt_double(*r.multiclass_kappa);
    detail::append_class_kappas(line, r);
    text += line + '\n';
  }
  detail::write_text_file(path, text);
}

inline void write_precision_recall_csv(const std::string& path,
                                       const std::vector<RunResult>& runs) {
  std::string text =
      "protocol,R,a,rho,run,class,precision,recall,base_rate,kappa,subjects\n";
  for (const RunResult& r : runs) {
    if (r.skipped) continue;
    for (OrientationClass c : kDisclosingClasses) {
      const ClassScore& s = r.scores.per_class[static_cast<std::size_t>(c)];
      std::string line = r.protocol;
      line += ',';
      if (r.protocol == "partial") line += detail::fmt_double(r.R);
      line += ',';
      if (r.protocol == "full") line += detail::fmt_double(r.a);
      line += ',';
      if (r.protocol == "full") line += detail::fmt_double(r.rho);
      line += ',' + std::to_string(r.run_index) + ',' + to_string(c) + ',' +
              detail::fmt_double(s.precision) + ',' + detail::fmt_double(s.recall) +
              ',' + detail::fmt_double(s.base_rate) + ',' + detail::fmt_double(s.kappa) +
              ',' + std::to_string(s.subjects);
      text += line + '\n';
    }
  }
  detail::write_text_file(path, text);
}

namespace detail {

inline void append_leak_rows(std::string& text, const std::string& protocol,
                             const std::string& rho_field, const LeakFactorSet& set) {
  auto row = [&](const std::string& target, const LeakFactorEstimate& est) {
    text += protocol + ',' + rho_field + ',' + target + ',' + fmt_double(est.slope) +
            ',' + fmt_double(est.intercept) + ',' + fmt_double(est.std_error) + ',' +
            fmt_double(est.t_stat) + ',' + fmt_double(est.p_value) + ',' +
            std::to_string(est.n_points) + ',' + (est.perfect_fit ? "true" : "false") +
            '\n';
  };
  if (set.mean_kappa) row("mean_kappa", *set.mean_kappa);
  for (OrientationClass c : kAllClasses) {
    const auto& est = set.per_class[static_cast<std::size_t>(c)];
    if (est) row(to_string(c), *est);
  }
}

}  // namespace detail

inline void write_partial_leak_factors_csv(const std::string& path,
                                           const LeakFactorSet& set) {
  std::string text =
      "protocol,rho,target,slope,intercept,std_error,t_stat,p_value,n_points,"
      "perfect_fit\n";
  detail::append_leak_rows(text, "partial", "", set);
  detail::write_text_file(path, text);
}

inline void write_full_leak_factors_csv(
    const std::string& path,
    const std::vector<std::pair<double, LeakFactorSet>>& per_rho) {
  std::string text =
      "protocol,rho,target,slope,intercept,std_error,t_stat,p_value,n_points,"
      "perfect_fit\n";
  for (const auto& [rho, set] : per_rho) {
    detail::append_leak_rows(text, "full", detail::fmt_double(rho), set);
  }
  detail::write_text_file(path, text);
}

inline void write_tpr_bins_csv(const std::string& path, const PosthocTables& tables) {
  std::string text = "table,class,bin_lo,bin_hi,population,classified,correct,tpr\n";
  auto emit = [&](const char* name, const std::vector<TprBin>& bins) {
    for (const TprBin& b : bins) {
      text += std::string(name) + ',' + to_string(tables.ratio_class) + ',' +
              detail::fmt_double(b.lo) + ',' + detail::fmt_double(b.hi) + ',' +
              std::to_string(b.population) + ',' + std::to_string(b.classified) + ',' +
              std::to_string(b.correct) + ',';
      if (b.tpr) text += detail::fmt_double(*b.tpr);
      text += '\n';
    }
  };
  emit("d1_disclosing_count", tables.by_d1_disclosing);
  emit("d2_size", tables.by_d2_size);
  emit("d1_same_class_ratio", tables.by_d1_same_class_ratio);
  emit("d2_same_class_ratio", tables.by_d2_same_class_ratio);
  detail::write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// Posthoc records: CSV round-trip (the `full` subcommand writes them, the
// `posthoc` subcommand reads them back).

inline void write_records_csv(const std::string& path,
                              const std::vector<PosthocRecord>& records) {
  std::string text = "a,rho,run,node,truth,predicted";
  for (OrientationClass c : kAllClasses) text += std::string(",d1_") + to_string(c);
  for (OrientationClass c : kAllClasses) text += std::string(",d2_") + to_string(c);
  text += ",d1_total,d2_total\n";
  for (const PosthocRecord& r : records) {
    std::string line = detail::fmt_double(r.a) + ',' + detail::fmt_double(r.rho) + ',' +
                       std::to_string(r.run_index) + ',' + std::to_string(r.node) + ',' +
                       to_string(r.truth) + ',';
    if (r.predicted) line += to_string(*r.predicted);
    for (std::uint32_t v : r.d1_class_counts) line += ',' + std::to_string(v);
    for (std::uint32_t v : r.d2_class_counts) line += ',' + std::to_string(v);
    line += ',' + std::to_string(r.d1_total) + ',' + std::to_string(r.d2_total);
    text += line + '\n';
  }
  detail::write_text_file(path, text);
}

inline std::vector<PosthocRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open records file: " + path);
  std::vector<PosthocRecord> out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(f, line)) {
    fail(ErrorCode::ParseError, path + ":1: missing header row");
  }
  ++lineno;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() && f.eof()) break;
    const std::string where = path + ":" + std::to_string(lineno);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 6 + 2 * kNumClasses + 2) {
      fail(ErrorCode::ParseError, where + ": wrong field count");
    }
    try {
      PosthocRecord r;
      r.a = std::stod(fields[0]);
      r.rho = std::stod(fields[1]);
      r.run_index = std::stoi(fields[2]);
      r.node = static_cast<std::uint32_t>(std::stoul(fields[3]));
      r.truth = parse_class(fields[4]);
      if (!fields[5].empty()) r.predicted = parse_class(fields[5]);
      for (int c = 0; c < kNumClasses; ++c) {
        r.d1_class_counts[static_cast<std::size_t>(c)] =
            static_cast<std::uint32_t>(std::stoul(fields[6 + static_cast<std::size_t>(c)]));
        r.d2_class_counts[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(
            std::stoul(fields[6 + kNumClasses + static_cast<std::size_t>(c)]));
      }
      r.d1_total =
          static_cast<std::uint32_t>(std::stoul(fields[6 + 2 * kNumClasses]));
      r.d2_total =
          static_cast<std::uint32_t>(std::stoul(fields[6 + 2 * kNumClasses + 1]));
      out.push_back(r);
    } catch (const AuditError&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::ParseError, where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace shadowaudit
