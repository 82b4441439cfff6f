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

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shadowaudit/experiments.hpp"
#include "shadowaudit/graph.hpp"
#include "shadowaudit/netgen.hpp"
#include "shadowaudit/report.hpp"

namespace sa = shadowaudit;
namespace fs = std::filesystem;

namespace {

std::uint64_t env_or_default_seed() {
  const char* env = std::getenv("SHADOW_AUDIT_SEED");
  if (env == nullptr) return 0;
  std::string_view sv(env);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size()) {
    sa::fail(sa::ErrorCode::InvalidConfig,
             "SHADOW_AUDIT_SEED is not an unsigned integer: " + std::string(sv));
  }
  return v;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) sa::fail(sa::ErrorCode::IoError, "cannot open config file: " + path);
  try {
    nlohmann::json j = nlohmann::json::parse(f);
    if (!j.is_object()) {
      sa::fail(sa::ErrorCode::InvalidConfig, path + ": config root must be an object");
    }
    return j;
  } catch (const sa::AuditError&) {
    throw;
  } catch (const std::exception& e) {
    sa::fail(sa::ErrorCode::ParseError, path + ": " + e.what());
  }
}

sa::SocialGraph load_graph_prefix(const std::string& prefix) {
  return sa::load_graph(prefix + ".profiles.tsv", prefix + ".edges.tsv");
}

nlohmann::json file_graph_source(const std::string& prefix) {
  return {
      {"type", "files"},
      {"prefix", prefix},
      {"profiles", prefix + ".profiles.tsv"},
      {"edges", prefix + ".edges.tsv"},
  };
}

// Shared flag bundle and precedence plumbing: CLI > config file > defaults,
// with SHADOW_AUDIT_SEED below the config file and above the built-in 0.
struct CommonFlags {
  std::string graph_prefix;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 0;
  int reference_year = 2008;
  bool xw_count_link = false;
  bool quiet = false;

  int trees = 100;
  int max_depth = 0;
  int min_samples_split = 2;
  int mtry = 0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* year_opt = nullptr;
  CLI::Option* xw_opt = nullptr;
  CLI::Option* trees_opt = nullptr;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* split_opt = nullptr;
  CLI::Option* mtry_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph", graph_prefix,
                    "Graph file prefix (reads <prefix>.profiles.tsv and "
                    "<prefix>.edges.tsv)")
        ->required();
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--out-dir", out_dir, "Directory for reports and CSV files");
    seed_opt = cmd->add_option("--seed", seed, "Root RNG seed");
    jobs_opt = cmd->add_option("--jobs", jobs, "Worker threads (default: all cores)");
    year_opt = cmd->add_option("--reference-year", reference_year,
                               "Year used to turn birth years into ages");
    xw_opt = cmd->add_flag("--xw-count-link,!--no-xw-count-link", xw_count_link,
                           "Weight x_w by common friends + 1 instead of common friends");
    trees_opt = cmd->add_option("--trees", trees, "Trees per random forest");
    depth_opt = cmd->add_option("--max-depth", max_depth,
                                "Maximum tree depth (unlimited when omitted)");
    split_opt = cmd->add_option("--min-samples-split", min_samples_split,
                                "Smallest node the tree growth may split");
    mtry_opt = cmd->add_option("--mtry", mtry,
                               "Features considered per split (default: floor(sqrt(d)))");
    cmd->add_flag("--quiet", quiet, "Suppress per-run progress lines");
  }

  nlohmann::json file_config() const {
    if (config_path.empty()) return nlohmann::json::object();
    return load_config_file(config_path);
  }

  std::uint64_t resolve_seed(const nlohmann::json& file) const {
    if (seed_opt->count() > 0) return seed;
    if (file.contains("seed")) return file.at("seed").get<std::uint64_t>();
    return env_or_default_seed();
  }

  int resolve_jobs(const nlohmann::json& file) const {
    int v = 0;
    if (jobs_opt->count() > 0) {
      v = jobs;
    } else if (file.contains("jobs")) {
      v = file.at("jobs").get<int>();
    }
    if (v <= 0) v = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return v;
  }

  sa::ForestConfig resolve_forest(const nlohmann::json& file) const {
    sa::ForestConfig cfg;
    if (file.contains("forest")) cfg = sa::forest_config_from_json(file.at("forest"));
    if (trees_opt->count() > 0) cfg.n_trees = trees;
    if (depth_opt->count() > 0) cfg.max_depth = max_depth;
    if (split_opt->count() > 0) cfg.min_samples_split = min_samples_split;
    if (mtry_opt->count() > 0) cfg.mtry = mtry;
    return cfg;
  }

  int resolve_reference_year(const nlohmann::json& file) const {
    if (year_opt->count() > 0) return reference_year;
    if (file.contains("reference_year")) return file.at("reference_year").get<int>();
    return 2008;
  }

  bool resolve_xw(const nlohmann::json& file) const {
    if (xw_opt->count() > 0) return xw_count_link;
    if (file.contains("xw_count_link")) return file.at("xw_count_link").get<bool>();
    return false;
  }
};

// Serialized progress printing; runs complete on worker threads.
class ProgressPrinter {
 public:
  explicit ProgressPrinter(bool quiet) : quiet_(quiet) {}

  void operator()(const sa::RunResult& r) {
    if (quiet_) return;
    std::string line = "[" + r.protocol + "]";
    if (r.protocol == "partial") {
      line += " R=" + sa::detail::fmt_double(r.R);
    } else {
      line += " a=" + sa::detail::fmt_double(r.a) + " rho=" + sa::detail::fmt_double(r.rho);
    }
    line += " run=" + std::to_string(r.run_index);
    if (r.skipped) {
      line += " skipped (" + r.skip_reason + ")";
    } else {
      line += " mean_kappa=" + sa::detail::fmt_double(r.scores.mean_kappa);
      if (r.multiclass_kappa) {
        line += " multiclass_kappa=" + sa::detail::fmt_double(*r.multiclass_kappa);
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), " (%.2fs)", r.duration_seconds);
      line += buf;
    }
    std::lock_guard<std::mutex> lock(mu_);
    std::cerr << line << '\n';
  }

 private:
  bool quiet_;
  std::mutex mu_;
};

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) sa::fail(sa::ErrorCode::IoError, "cannot create output directory: " + out_dir);
}

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string describe_leak(const sa::LeakFactorSet& set) {
  if (!set.mean_kappa) return "leak_slope=n/a";
  return "leak_slope=" + sa::detail::fmt_double(set.mean_kappa->slope) +
         " p=" + sa::detail::fmt_double(set.mean_kappa->p_value);
}

// ---------------------------------------------------------------------------
// Subcommand wiring.

struct GenOpts {
  std::string preset;
  std::uint64_t n = 0;
  double mean_degree = 3.23;
  double homophily = 0.0;
  std::vector<double> proportions;
  std::uint64_t seed = 0;
  int age_min = 1950;
  int age_max = 1995;
  std::string out = "graph";
  CLI::Option* seed_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* md_opt = nullptr;
  CLI::Option* props_opt = nullptr;
};

void setup_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "Generate a synthetic social graph");
  auto opts = std::make_shared<GenOpts>();
  cmd->add_option("--preset", opts->preset, "Named preset: friendster-like")
      ->check(CLI::IsMember({"friendster-like"}));
  cmd->add_option("--n", opts->n, "Number of users")->required();
  opts->md_opt = cmd->add_option("--mean-degree", opts->mean_degree, "Target mean degree");
  opts->h_opt = cmd->add_option("--homophily", opts->homophily,
                                "Same-class edge planting probability in [0,1]");
  opts->props_opt = cmd->add_option("--proportions", opts->proportions,
                                    "Eight class proportions (FF,FM,HeF,HoM,HoF,HeM,BiF,BiM)")
                        ->delimiter(',')
                        ->expected(8);
  opts->seed_opt = cmd->add_option("--seed", opts->seed, "Root RNG seed");
  cmd->add_option("--age-min", opts->age_min, "Earliest birth year");
  cmd->add_option("--age-max", opts->age_max, "Latest birth year");
  cmd->add_option("--out", opts->out,
                  "Output prefix (writes <out>.profiles.tsv, <out>.edges.tsv, "
                  "<out>.genmeta.json)");

  cmd->callback([opts]() {
    const std::uint64_t seed =
        opts->seed_opt->count() > 0 ? opts->seed : env_or_default_seed();
    nlohmann::json meta = {
        {"tool", {{"name", sa::kToolName}, {"version", sa::kToolVersion}}},
        {"rng", sa::kRngAlgorithm},
    };
    std::optional<sa::SocialGraph> graph;
    if (opts->preset == "friendster-like") {
      if (opts->h_opt->count() || opts->md_opt->count() || opts->props_opt->count()) {
        sa::fail(sa::ErrorCode::InvalidConfig,
                 "--preset friendster-like fixes homophily, proportions, and "
                 "mean degree; drop the explicit flags");
      }
      sa::TunedGen tuned = sa::friendster_like_tuned(opts->n, seed);
      meta["config"] = sa::gen_config_json(tuned.config);
      meta["preset"] = "friendster-like";
      meta["realized_assortative_fraction"] = tuned.realized_assortative;
      meta["bisection_iterations"] = tuned.bisection_iterations;
      graph = std::move(tuned.graph);
    } else {
      if (opts->h_opt->count() == 0) {
        sa::fail(sa::ErrorCode::InvalidConfig,
                 "either --preset friendster-like or --homophily is required");
      }
      sa::GenConfig cfg;
      cfg.n = opts->n;
      if (opts->props_opt->count() > 0) {
        std::copy_n(opts->proportions.begin(), sa::kNumClasses,
                    cfg.class_proportions.begin());
      } else {
        cfg.class_proportions = sa::kFriendsterProportions;
      }
      cfg.mean_degree = opts->mean_degree;
      cfg.homophily = opts->homophily;
      cfg.seed = seed;
      cfg.age_range = {opts->age_min, opts->age_max};
      graph = sa::generate(cfg);
      meta["config"] = sa::gen_config_json(cfg);
      try {
        meta["realized_assortative_fraction"] = sa::assortative_edge_fraction(*graph);
      } catch (const sa::AuditError&) {
        meta["realized_assortative_fraction"] = nullptr;
      }
    }
    sa::save_graph(*graph, opts->out + ".profiles.tsv", opts->out + ".edges.tsv");
    sa::write_json_file(opts->out + ".genmeta.json", meta);
    std::cout << "generated nodes=" << graph->num_users()
              << " edges=" << graph->num_edges() << " out=" << opts->out << '\n';
  });
}

void setup_validate(CLI::App& app) {
  auto* cmd = app.add_subcommand("validate", "Load a graph pair and check invariants");
  auto prefix = std::make_shared<std::string>();
  cmd->add_option("--graph", *prefix, "Graph file prefix")->required();
  cmd->callback([prefix]() {
    sa::SocialGraph g = load_graph_prefix(*prefix);
    std::cout << "OK nodes=" << g.num_users() << " edges=" << g.num_edges()
              << " mean_degree=" << sa::detail::fmt_double(g.mean_degree()) << '\n';
  });
}

void setup_partial(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "partial", "Partial shadow-profile audit: hidden attributes of members");
  auto flags = std::make_shared<CommonFlags>();
  flags->attach(cmd);
  auto grid = std::make_shared<std::vector<double>>();
  auto runs = std::make_shared<int>(10);
  auto* grid_opt =
      cmd->add_option("--R", *grid, "Disclosure probabilities to sweep")->delimiter(',');
  auto* runs_opt = cmd->add_option("--runs", *runs, "Runs per R value");

  cmd->callback([flags, grid, runs, grid_opt, runs_opt]() {
    const nlohmann::json file = flags->file_config();
    const nlohmann::json* section =
        file.contains("partial") ? &file.at("partial") : nullptr;

    sa::PartialConfig cfg;
    if (section && section->contains("R_grid")) {
      cfg.R_grid = section->at("R_grid").get<std::vector<double>>();
    }
    if (section && section->contains("runs_per_R")) {
      cfg.runs_per_R = section->at("runs_per_R").get<int>();
    }
    if (grid_opt->count() > 0) cfg.R_grid = *grid;
    if (runs_opt->count() > 0) cfg.runs_per_R = *runs;
    cfg.seed = flags->resolve_seed(file);
    cfg.forest = flags->resolve_forest(file);
    cfg.reference_year = flags->resolve_reference_year(file);
    cfg.xw_count_link = flags->resolve_xw(file);
    const int jobs = flags->resolve_jobs(file);

    sa::SocialGraph g = load_graph_prefix(flags->graph_prefix);
    auto progress = std::make_shared<ProgressPrinter>(flags->quiet);
    sa::RunHooks hooks;
    hooks.on_run_complete = [progress](const sa::RunResult& r) { (*progress)(r); };

    const auto t0 = std::chrono::steady_clock::now();
    sa::PartialOutcome outcome = sa::run_partial(g, cfg, jobs, hooks);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ensure_out_dir(flags->out_dir);
    const std::string report_path = join_path(flags->out_dir, "report.json");
    sa::write_json_file(report_path,
                        sa::partial_report_json(g, cfg, outcome,
                                                file_graph_source(flags->graph_prefix)));
    sa::write_kappa_vs_r_csv(join_path(flags->out_dir, "kappa_vs_R.csv"), outcome.runs);
    sa::write_precision_recall_csv(join_path(flags->out_dir, "precision_recall.csv"),
                                   outcome.runs);
    sa::write_partial_leak_factors_csv(join_path(flags->out_dir, "leak_factors.csv"),
                                       outcome.leak);
    sa::write_json_file(join_path(flags->out_dir, "timings.json"),
                        sa::timings_json(outcome.runs, jobs, wall));

    std::size_t skipped = 0;
    for (const auto& r : outcome.runs) skipped += r.skipped;
    std::cout << "partial complete: runs=" << outcome.runs.size()
              << " skipped=" << skipped << ' ' << describe_leak(outcome.leak)
              << " report=" << report_path << '\n';
  });
}

void setup_full(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "full", "Full shadow-profile audit: non-users seen through contact lists");
  auto flags = std::make_shared<CommonFlags>();
  flags->attach(cmd);
  auto a_grid = std::make_shared<std::vector<double>>();
  auto rho_grid = std::make_shared<std::vector<double>>();
  auto runs = std::make_shared<int>(10);
  auto* a_opt =
      cmd->add_option("--a", *a_grid, "Inside fractions to sweep")->delimiter(',');
  auto* rho_opt = cmd->add_option("--rho", *rho_grid, "Contact-list disclosure rates")
                      ->delimiter(',');
  auto* runs_opt = cmd->add_option("--runs", *runs, "Runs per (a, rho) pair");

  cmd->callback([flags, a_grid, rho_grid, runs, a_opt, rho_opt, runs_opt]() {
    const nlohmann::json file = flags->file_config();
    const nlohmann::json* section = file.contains("full") ? &file.at("full") : nullptr;

    sa::FullConfig cfg;
    if (section && section->contains("a_grid")) {
      cfg.a_grid = section->at("a_grid").get<std::vector<double>>();
    }
    if (section && section->contains("rho_grid")) {
      cfg.rho_grid = section->at("rho_grid").get<std::vector<double>>();
    }
    if (section && section->contains("runs_per_pair")) {
      cfg.runs_per_pair = section->at("runs_per_pair").get<int>();
    }
    if (a_opt->count() > 0) cfg.a_grid = *a_grid;
    if (rho_opt->count() > 0) cfg.rho_grid = *rho_grid;
    if (runs_opt->count() > 0) cfg.runs_per_pair = *runs;
    cfg.seed = flags->resolve_seed(file);
    cfg.forest = flags->resolve_forest(file);
    cfg.reference_year = flags->resolve_reference_year(file);
    cfg.xw_count_link = flags->resolve_xw(file);
    cfg.collect_records = true;
    const int jobs = flags->resolve_jobs(file);

    sa::SocialGraph g = load_graph_prefix(flags->graph_prefix);
    auto progress = std::make_shared<ProgressPrinter>(flags->quiet);
    sa::RunHooks hooks;
    hooks.on_run_complete = [progress](const sa::RunResult& r) { (*progress)(r); };

    const auto t0 = std::chrono::steady_clock::now();
    sa::FullOutcome outcome = sa::run_full(g, cfg, jobs, hooks);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ensure_out_dir(flags->out_dir);
    const std::string report_path = join_path(flags->out_dir, "report.json");
    sa::write_json_file(report_path,
                        sa::full_report_json(g, cfg, outcome,
                                             file_graph_source(flags->graph_prefix)));
    sa::write_kappa_vs_a_csv(join_path(flags->out_dir, "kappa_vs_a.csv"), outcome.runs);
    sa::write_precision_recall_csv(join_path(flags->out_dir, "precision_recall.csv"),
                                   outcome.runs);
    sa::write_full_leak_factors_csv(join_path(flags->out_dir, "leak_factors.csv"),
                                    outcome.per_rho);
    sa::write_records_csv(join_path(flags->out_dir, "records.csv"), outcome.records);
    sa::write_json_file(join_path(flags->out_dir, "timings.json"),
                        sa::timings_json(outcome.runs, jobs, wall));

    std::size_t skipped = 0;
    for (const auto& r : outcome.runs) skipped += r.skipped;
    std::cout << "full complete: runs=" << outcome.runs.size() << " skipped=" << skipped
              << " records=" << outcome.records.size() << " report=" << report_path
              << '\n';
  });
}

struct PosthocOpts {
  std::string records_path;
  double a = 0.0;
  double rho = 0.0;
  std::string cls;
  std::string out_dir = ".";
  CLI::Option* a_opt = nullptr;
  CLI::Option* rho_opt = nullptr;
  CLI::Option* cls_opt = nullptr;
};

void setup_posthoc(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "posthoc", "Bin classified non-users by neighborhood structure");
  auto opts = std::make_shared<PosthocOpts>();
  cmd->add_option("--records", opts->records_path,
                  "records.csv produced by the full subcommand")
      ->required();
  opts->a_opt = cmd->add_option("--a", opts->a, "Keep only records at this inside fraction");
  opts->rho_opt =
      cmd->add_option("--rho", opts->rho, "Keep only records at this disclosure rate");
  opts->cls_opt = cmd->add_option(
      "--class", opts->cls, "Ratio-table class (default: most common true class)");
  cmd->add_option("--out-dir", opts->out_dir, "Directory for posthoc outputs");

  cmd->callback([opts]() {
    std::vector<sa::PosthocRecord> records = sa::read_records_csv(opts->records_path);
    std::vector<sa::PosthocRecord> kept;
    for (const sa::PosthocRecord& r : records) {
      if (opts->a_opt->count() > 0 && r.a != opts->a) continue;
      if (opts->rho_opt->count() > 0 && r.rho != opts->rho) continue;
      kept.push_back(r);
    }
    if (kept.empty()) {
      sa::fail(sa::ErrorCode::InvalidConfig,
               "no records match the requested (a, rho) filter");
    }
    sa::OrientationClass cls;
    if (opts->cls_opt->count() > 0) {
      cls = sa::parse_class(opts->cls);
    } else {
      std::array<std::size_t, sa::kNumClasses> freq{};
      for (const sa::PosthocRecord& r : kept) {
        ++freq[static_cast<std::size_t>(r.truth)];
      }
      cls = sa::kAllClasses[static_cast<std::size_t>(
          std::max_element(freq.begin(), freq.end()) - freq.begin())];
    }
    sa::PosthocTables tables = sa::posthoc(kept, cls);

    ensure_out_dir(opts->out_dir);
    const std::string csv_path = join_path(opts->out_dir, "tpr_bins.csv");
    sa::write_tpr_bins_csv(csv_path, tables);

    auto bins_json = [](const std::vector<sa::TprBin>& bins) {
      nlohmann::json arr = nlohmann::json::array();
      for (const sa::TprBin& b : bins) {
        arr.push_back({{"lo", b.lo},
                       {"hi", b.hi},
                       {"population", b.population},
                       {"classified", b.classified},
                       {"correct", b.correct},
                       {"tpr", b.tpr ? nlohmann::json(*b.tpr) : nlohmann::json(nullptr)}});
      }
      return arr;
    };
    nlohmann::json j = {
        {"format_version", sa::kReportFormatVersion},
        {"tool", {{"name", sa::kToolName}, {"version", sa::kToolVersion}}},
        {"records_file", opts->records_path},
        {"filter",
         {{"a", opts->a_opt->count() > 0 ? nlohmann::json(opts->a) : nlohmann::json(nullptr)},
          {"rho", opts->rho_opt->count() > 0 ? nlohmann::json(opts->rho)
                                             : nlohmann::json(nullptr)}}},
        {"records_used", kept.size()},
        {"ratio_class", sa::to_string(cls)},
        {"tables",
         {{"d1_disclosing_count", bins_json(tables.by_d1_disclosing)},
          {"d2_size", bins_json(tables.by_d2_size)},
          {"d1_same_class_ratio", bins_json(tables.by_d1_same_class_ratio)},
          {"d2_same_class_ratio", bins_json(tables.by_d2_same_class_ratio)}}},
    };
    sa::write_json_file(join_path(opts->out_dir, "posthoc.json"), j);
    std::cout << "posthoc complete: records=" << kept.size()
              << " class=" << sa::to_string(cls) << " tables=" << csv_path << '\n';
  });
}

void setup_report(CLI::App& app) {
  auto* cmd =
      app.add_subcommand("report", "Merge run reports into aggregate CSV tables");
  auto inputs = std::make_shared<std::vector<std::string>>();
  auto out_dir = std::make_shared<std::string>(".");
  cmd->add_option("inputs", *inputs, "report.json files to merge")
      ->required()
      ->expected(-1);
  cmd->add_option("--out-dir", *out_dir, "Directory for merged CSV files");

  cmd->callback([inputs, out_dir]() {
    std::vector<sa::RunResult> partial_runs;
    std::vector<sa::RunResult> full_runs;
    for (const std::string& path : *inputs) {
      nlohmann::json j = load_config_file(path);
      if (!j.contains("runs")) {
        sa::fail(sa::ErrorCode::ParseError, path + ": no runs array");
      }
      for (const nlohmann::json& rj : j.at("runs")) {
        sa::RunResult r = sa::run_result_from_json(rj);
        (r.protocol == "partial" ? partial_runs : full_runs).push_back(std::move(r));
      }
    }
    ensure_out_dir(*out_dir);
    std::vector<sa::RunResult> all = partial_runs;
    all.insert(all.end(), full_runs.begin(), full_runs.end());
    sa::write_precision_recall_csv(join_path(*out_dir, "precision_recall.csv"), all);

    std::string leak_text =
        "protocol,rho,target,slope,intercept,std_error,t_stat,p_value,n_points,"
        "perfect_fit\n";
    if (!partial_runs.empty()) {
      sa::write_kappa_vs_r_csv(join_path(*out_dir, "kappa_vs_R.csv"), partial_runs);
      sa::LeakFactorSet leak = sa::detail::fit_leaks(
          partial_runs, [](const sa::RunResult& r) { return r.R; });
      sa::detail::append_leak_rows(leak_text, "partial", "", leak);
    }
    if (!full_runs.empty()) {
      sa::write_kappa_vs_a_csv(join_path(*out_dir, "kappa_vs_a.csv"), full_runs);
      std::vector<double> rhos;
      for (const auto& r : full_runs) rhos.push_back(r.rho);
      std::sort(rhos.begin(), rhos.end());
      rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
      for (double rho : rhos) {
        std::vector<sa::RunResult> matching;
        for (const auto& r : full_runs) {
          if (r.rho == rho) matching.push_back(r);
        }
        sa::LeakFactorSet leak = sa::detail::fit_leaks(
            matching, [](const sa::RunResult& r) { return r.a; });
        sa::detail::append_leak_rows(leak_text, "full", sa::detail::fmt_double(rho),
                                     leak);
      }
    }
    sa::detail::write_text_file(join_path(*out_dir, "leak_factors.csv"), leak_text);
    std::cout << "merged runs=" << all.size() << " from " << inputs->size()
              << " report(s) into " << *out_dir << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shadow-audit: privacy-leakage audit simulator for social graphs"};
  app.require_subcommand(1);
  setup_generate(app);
  setup_validate(app);
  setup_partial(app);
  setup_full(app);
  setup_posthoc(app);
  setup_report(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR:Usage: " << e.what() << '\n';
    return 1;
  } catch (const sa::AuditError& e) {
    std::cerr << "ERROR:" << sa::error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == sa::ErrorCode::InvalidConfig ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR:Internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
