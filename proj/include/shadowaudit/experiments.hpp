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

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shadowaudit/error.hpp"
#include "shadowaudit/features.hpp"
#include "shadowaudit/forest.hpp"
#include "shadowaudit/graph.hpp"
#include "shadowaudit/metrics.hpp"
#include "shadowaudit/parallel.hpp"
#include "shadowaudit/profile.hpp"
#include "shadowaudit/rng.hpp"

namespace shadowaudit {

/// The six classes that declare a romantic interest; only they are ever
/// prediction targets. FF/FM users stay in the graph as context.
inline constexpr std::array<OrientationClass, 6> kDisclosingClasses = {
    OrientationClass::HeF, OrientationClass::HoM, OrientationClass::HoF,
    OrientationClass::HeM, OrientationClass::BiF, OrientationClass::BiM};

struct PartialConfig {
  std::vector<double> R_grid;        // values in (0,1)
  int runs_per_R = 10;
  std::uint64_t seed = 0;
  ForestConfig forest;
  int reference_year = 2008;
  bool xw_count_link = false;
};

struct FullConfig {
  std::vector<double> a_grid;                  // values in (0,1]
  std::vector<double> rho_grid = {0.5, 0.7, 0.9};
  int runs_per_pair = 10;
  std::uint64_t seed = 0;
  ForestConfig forest;
  int reference_year = 2008;
  bool xw_count_link = false;
  bool collect_records = false;  // keep per-non-user records for posthoc
};

struct RunResult {
  std::string protocol;            // "partial" or "full"
  double R = 0.0;                  // partial
  double a = 0.0;                  // full
  double rho = 0.0;                // full
  int run_index = 0;
  bool skipped = false;
  std::string skip_reason;
  ConfusionMatrix cm;
  ClassScores scores;
  std::optional<double> multiclass_kappa;  // Cohen's κ; absent when degenerate
  std::uint64_t training_count = 0;
  std::uint64_t test_count = 0;
  std::uint64_t unreachable_count = 0;
  double duration_seconds = 0.0;   // wall clock; never part of reports
};

struct LeakFactorSet {
  std::optional<LeakFactorEstimate> mean_kappa;
  std::array<std::optional<LeakFactorEstimate>, kNumClasses> per_class{};
};

struct PartialOutcome {
  std::vector<RunResult> runs;               // (R, run) order
  LeakFactorSet leak;                        // x = R
  std::optional<SpearmanResult> trend;       // per-run (R, mean κ)
};

/// Per-non-user evidence kept for the post-hoc analyses. Neighborhood
/// counts are under the run's surviving-edge mask.
struct PosthocRecord {
  double a = 0.0;
  double rho = 0.0;
  int run_index = 0;
  std::uint32_t node = 0;
  OrientationClass truth = OrientationClass::FF;
  std::optional<OrientationClass> predicted;  // absent = unclassified
  std::array<std::uint32_t, kNumClasses> d1_class_counts{};
  std::array<std::uint32_t, kNumClasses> d2_class_counts{};
  std::uint32_t d1_total = 0;
  std::uint32_t d2_total = 0;
};

struct FullOutcome {
  std::vector<RunResult> runs;                        // (a, ρ, run) order
  std::vector<std::pair<double, LeakFactorSet>> per_rho;  // x = a
  std::vector<PosthocRecord> records;                 // when collect_records
};

// ---------------------------------------------------------------------------
// Hooks: mask decoration (tripwire instrumentation) and progress callbacks.

struct MaskContext {
  std::string_view protocol;  // "partial" | "full"
  std::string_view phase;     // "train" | "eval"
  double R = 0.0;
  double a = 0.0;
  double rho = 0.0;
  int run_index = -1;
  /// Partial protocol: flags (by node index) whose attributes are hidden.
  const std::vector<std::uint8_t>* attribute_hidden = nullptr;
  /// Full protocol: nodes with index < inside_count are members.
  std::uint32_t inside_count = 0;
};

struct RunHooks {
  /// When set, every extraction pass routes its mask through this decorator.
  std::function<VisibilityMask(const VisibilityMask&, const MaskContext&)> decorate_mask;
  /// Called after each run finishes (from a worker when jobs > 1).
  std::function<void(const RunResult&)> on_run_complete;
};

namespace detail {

template <typename Mask>
VisibilityMask erase_mask(const Mask& mask) {
  return VisibilityMask{
      [&mask](std::uint32_t u) { return mask.attribute_visible(u); },
      [&mask](std::uint32_t u, std::uint32_t v) { return mask.edge_present(u, v); },
      mask.max_distance};
}

/// Runs fn with the mask, decorated first when hooks ask for it.
template <typename Mask, typename Fn>
void with_mask(const Mask& mask, const RunHooks& hooks, const MaskContext& ctx, Fn&& fn) {
  if (hooks.decorate_mask) {
    VisibilityMask erased = erase_mask(mask);
    VisibilityMask decorated = hooks.decorate_mask(erased, ctx);
    fn(decorated);
  } else {
    fn(mask);
  }
}

inline std::uint64_t param_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

inline bool is_disclosing_node(const SocialGraph& g, std::uint32_t u) {
  auto c = g.node_class(u);
  return c && is_disclosing(*c);
}

inline int distinct_classes(const SocialGraph& g, const std::vector<std::uint32_t>& nodes) {
  bool seen[kNumClasses] = {};
  for (std::uint32_t u : nodes) seen[static_cast<std::size_t>(*g.node_class(u))] = true;
  int n = 0;
  for (bool b : seen) n += b;
  return n;
}

/// Attributes visible unless flagged hidden; every edge present.
struct PartialMask {
  const std::vector<std::uint8_t>* hidden = nullptr;
  int max_distance = 3;
  bool attribute_visible(std::uint32_t u) const { return !(*hidden)[u]; }
  bool edge_present(std::uint32_t, std::uint32_t) const { return true; }
};

/// Full-protocol evaluation view: member attributes visible, member-member
/// edges always present, member-to-non-user edges survive per the member's
/// disclosure coin, non-user-to-non-user edges never known.
struct FullEvalMask {
  std::uint32_t inside_count = 0;
  const std::vector<std::uint8_t>* keep_cross = nullptr;
  int max_distance = 2;
  bool attribute_visible(std::uint32_t u) const { return u < inside_count; }
  bool edge_present(std::uint32_t u, std::uint32_t v) const {
    const bool ui = u < inside_count;
    const bool vi = v < inside_count;
    if (ui && vi) return true;
    if (!ui && !vi) return false;
    return (*keep_cross)[ui ? u : v] != 0;
  }
};

inline void finalize_metrics(RunResult& res) {
  res.scores = class_scores(res.cm);
  if (res.cm.classified_total() > 0) {
    try {
      res.multiclass_kappa = kappa(res.cm);
    } catch (const AuditError&) {
      res.multiclass_kappa = std::nullopt;  // degenerate marginals
    }
  }
}

/// Leak-factor fits over non-skipped runs: x = param_of(run), y = mean κ
/// (and per-class one-vs-rest κ, classes fitted only over runs where they
/// had subjects). Fits with < 3 points or constant x stay absent.
template <typename ParamOf>
LeakFactorSet fit_leaks(const std::vector<RunResult>& runs, ParamOf&& param_of) {
  LeakFactorSet set;
  std::vector<std::pair<double, double>> mean_points;
  for (const RunResult& r : runs) {
    if (r.skipped) continue;
    mean_points.emplace_back(param_of(r), r.scores.mean_kappa);
  }
  if (mean_points.size() >= 3) {
    try {
      set.mean_kappa = ols_leak_factor(mean_points);
    } catch (const AuditError&) {
    }
  }
  for (OrientationClass c : kAllClasses) {
    std::vector<std::pair<double, double>> points;
    for (const RunResult& r : runs) {
      if (r.skipped) continue;
      const ClassScore& s = r.scores.per_class[static_cast<std::size_t>(c)];
      if (s.subjects == 0) continue;
      points.emplace_back(param_of(r), s.kappa);
    }
    if (points.size() < 3) continue;
    try {
      set.per_class[static_cast<std::size_t>(c)] = ols_leak_factor(points);
    } catch (const AuditError&) {
    }
  }
  return set;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Partial shadow profiles: hidden attributes of existing users.

/// One (R, run) cell of the partial protocol. `eligible` lists the
/// six-class nodes ascending.
namespace detail {

inline RunResult partial_run_one(const SocialGraph& g, const PartialConfig& cfg,
                                 const std::vector<std::uint32_t>& eligible, double R,
                                 int run, const RunHooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.protocol = "partial";
  res.R = R;
  res.run_index = run;

  const std::uint64_t run_seed = derive_seed(derive_seed(cfg.seed, 0x501),
                                             param_bits(R), static_cast<std::uint64_t>(run));

  // Each eligible user joins the training set with probability R and is a
  // test subject otherwise; test users' attributes go dark for everyone.
  Rng assign_rng(derive_seed(run_seed, 10));
  std::vector<std::uint8_t> hidden(g.num_users(), 0);
  std::vector<std::uint32_t> train_nodes, test_nodes;
  for (std::uint32_t u : eligible) {
    if (assign_rng.bernoulli(R)) {
      train_nodes.push_back(u);
    } else {
      test_nodes.push_back(u);
      hidden[u] = 1;
    }
  }
  res.training_count = train_nodes.size();
  res.test_count = test_nodes.size();

  auto skip = [&](const std::string& reason) {
    res.skipped = true;
    res.skip_reason = reason;
    res.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  if (train_nodes.size() < 2) return skip("empty training set");
  if (distinct_classes(g, train_nodes) < 2) {
    return skip("training rows carry fewer than 2 classes");
  }
  if (test_nodes.empty()) return skip("empty test set");

  const FeatureLayout layout{false, 3};
  FeatureOptions opts;
  opts.include_own_profile = false;
  opts.reference_year = cfg.reference_year;
  opts.xw_count_link = cfg.xw_count_link;
  const PartialMask mask{&hidden, 3};

  MaskContext ctx;
  ctx.protocol = "partial";
  ctx.phase = "train";
  ctx.R = R;
  ctx.run_index = run;
  ctx.attribute_hidden = &hidden;

  std::vector<FeatureVector> x_train;
  std::vector<OrientationClass> y_train;
  x_train.reserve(train_nodes.size());
  y_train.reserve(train_nodes.size());
  with_mask(mask, hooks, ctx, [&](const auto& m) {
    BfsScratch scratch;
    FeatureVector v;
    for (std::uint32_t u : train_nodes) {
      build_vector_into(g, u, m, opts, layout, scratch, v);
      x_train.push_back(v);
      y_train.push_back(*g.node_class(u));
    }
  });

  ForestConfig fc = cfg.forest;
  fc.seed = derive_seed(run_seed, 20);
  const RandomForestModel model = train_forest(x_train, y_train, fc);

  ctx.phase = "eval";
  with_mask(mask, hooks, ctx, [&](const auto& m) {
    BfsScratch scratch;
    FeatureVector v;
    for (std::uint32_t u : test_nodes) {
      build_vector_into(g, u, m, opts, layout, scratch, v);
      res.cm.add(*g.node_class(u), predict(model, v));
    }
  });

  finalize_metrics(res);
  res.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

/// Partial protocol: for every R in the grid and every run, split
/// the six-class users into training (visible) and test (hidden) by a coin
/// of bias R, train a forest on distance-≤3 neighborhood vectors, and score
/// predictions of the hidden users' classes. All friendship links persist;
/// FF/FM (and genderless) profiles stay visible context. The leak factor is
/// the OLS slope of κ against R over all run points.
inline PartialOutcome run_partial(const SocialGraph& g, const PartialConfig& cfg,
                                  int jobs = 1, const RunHooks& hooks = {}) {
  if (cfg.R_grid.empty()) fail(ErrorCode::InvalidConfig, "R_grid is empty");
  for (double R : cfg.R_grid) {
    if (!(R > 0.0 && R < 1.0)) fail(ErrorCode::InvalidConfig, "R values must lie in (0,1)");
  }
  if (cfg.runs_per_R < 1) fail(ErrorCode::InvalidConfig, "runs_per_R must be positive");

  std::vector<std::uint32_t> eligible;
  for (std::uint32_t u = 0; u < g.num_users(); ++u) {
    if (detail::is_disclosing_node(g, u)) eligible.push_back(u);
  }
  if (detail::distinct_classes(g, eligible) < 2) {
    fail(ErrorCode::InsufficientClasses,
         "graph carries fewer than 2 interest-disclosing classes");
  }

  PartialOutcome out;
  const std::size_t tasks =
      cfg.R_grid.size() * static_cast<std::size_t>(cfg.runs_per_R);
  out.runs.resize(tasks);
  parallel_for(tasks, jobs, [&](std::size_t t) {
    const std::size_t ri = t / static_cast<std::size_t>(cfg.runs_per_R);
    const int run = static_cast<int>(t % static_cast<std::size_t>(cfg.runs_per_R));
    out.runs[t] = detail::partial_run_one(g, cfg, eligible, cfg.R_grid[ri], run, hooks);
    if (hooks.on_run_complete) hooks.on_run_complete(out.runs[t]);
  });

  out.leak = detail::fit_leaks(out.runs, [](const RunResult& r) { return r.R; });
  std::vector<std::pair<double, double>> trend_points;
  for (const RunResult& r : out.runs) {
    if (!r.skipped) trend_points.emplace_back(r.R, r.scores.mean_kappa);
  }
  if (trend_points.size() >= 3) {
    try {
      out.trend = spearman(trend_points);
    } catch (const AuditError&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full shadow profiles: non-users known only through members' contacts.

namespace detail {

inline RunResult full_run_one(const SocialGraph& g, const FullConfig& cfg,
                              std::uint64_t a_seed, const RandomForestModel& model,
                              double a, std::size_t inside_count,
                              std::uint64_t training_count,
                              const std::vector<std::uint32_t>& subjects,
                              const std::string& a_skip, double rho, int run,
                              const RunHooks& hooks,
                              std::vector<PosthocRecord>& records) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.protocol = "full";
  res.a = a;
  res.rho = rho;
  res.run_index = run;
  res.training_count = training_count;
  res.test_count = subjects.size();

  auto skip = [&](const std::string& reason) {
    res.skipped = true;
    res.skip_reason = reason;
    res.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  if (!a_skip.empty()) return skip(a_skip);
  if (subjects.empty()) return skip("no evaluable non-users");

  // Per-member disclosure coin: heads keeps every contact-list link that
  // member has to non-users, tails drops them all.
  const std::uint64_t run_seed =
      derive_seed(a_seed, param_bits(rho), static_cast<std::uint64_t>(run));
  Rng coin_rng(derive_seed(run_seed, 30));
  std::vector<std::uint8_t> keep(inside_count, 0);
  for (std::size_t i = 0; i < inside_count; ++i) {
    keep[i] = coin_rng.bernoulli(rho) ? 1 : 0;
  }

  const FeatureLayout layout{false, 2};
  FeatureOptions opts;
  opts.include_own_profile = false;
  opts.reference_year = cfg.reference_year;
  opts.xw_count_link = cfg.xw_count_link;
  const FullEvalMask mask{static_cast<std::uint32_t>(inside_count), &keep, 2};

  MaskContext ctx;
  ctx.protocol = "full";
  ctx.phase = "eval";
  ctx.a = a;
  ctx.rho = rho;
  ctx.run_index = run;
  ctx.inside_count = static_cast<std::uint32_t>(inside_count);

  with_mask(mask, hooks, ctx, [&](const auto& m) {
    BfsScratch scratch;
    FeatureVector v;
    for (std::uint32_t u : subjects) {
      const OrientationClass truth = *g.node_class(u);
      bool reachable = false;
      for (std::uint32_t nb : g.neighbors(u)) {
        if (nb < inside_count && keep[nb]) {
          reachable = true;
          break;
        }
      }
      PosthocRecord rec;
      if (cfg.collect_records) {
        rec.a = a;
        rec.rho = rho;
        rec.run_index = run;
        rec.node = u;
        rec.truth = truth;
      }
      if (!reachable) {
        res.cm.add_unclassified(truth);
        ++res.unreachable_count;
        if (cfg.collect_records) records.push_back(rec);
        continue;
      }
      build_vector_into(g, u, m, opts, layout, scratch, v);
      const OrientationClass pred = predict(model, v);
      res.cm.add(truth, pred);
      if (cfg.collect_records) {
        rec.predicted = pred;
        for (OrientationClass c : kAllClasses) {
          rec.d1_class_counts[static_cast<std::size_t>(c)] =
              static_cast<std::uint32_t>(v[layout.index_xk(1, c)]);
          rec.d2_class_counts[static_cast<std::size_t>(c)] =
              static_cast<std::uint32_t>(v[layout.index_xk(2, c)]);
        }
        rec.d1_total = static_cast<std::uint32_t>(v[layout.index_nk(1)]);
        rec.d2_total = static_cast<std::uint32_t>(v[layout.index_nk(2)]);
        records.push_back(rec);
      }
    }
  });

  finalize_metrics(res);
  res.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

/// Full protocol (three steps): (1) per a, train RF_a once on the first
/// ⌈a·N⌉ joiners' induced subgraph — distance-≤2 vectors, no own profile,
/// no links to non-users; (2) per (ρ, run), members disclose their whole
/// contact list with probability ρ; (3) predict every six-class non-user
/// reachable through a surviving link, counting the unreachable as
/// unclassified. Leak factor per ρ is the OLS slope of κ against a.
inline FullOutcome run_full(const SocialGraph& g, const FullConfig& cfg, int jobs = 1,
                            const RunHooks& hooks = {}) {
  if (cfg.a_grid.empty()) fail(ErrorCode::InvalidConfig, "a_grid is empty");
  for (double a : cfg.a_grid) {
    if (!(a > 0.0 && a <= 1.0)) fail(ErrorCode::InvalidConfig, "a values must lie in (0,1]");
  }
  if (cfg.rho_grid.empty()) fail(ErrorCode::InvalidConfig, "rho_grid is empty");
  for (double rho : cfg.rho_grid) {
    if (!(rho > 0.0 && rho <= 1.0)) {
      fail(ErrorCode::InvalidConfig, "rho values must lie in (0,1]");
    }
  }
  if (cfg.runs_per_pair < 1) fail(ErrorCode::InvalidConfig, "runs_per_pair must be positive");
  if (g.num_users() == 0) fail(ErrorCode::EmptyGraph, "graph has no nodes");

  {
    std::vector<std::uint32_t> all_disclosing;
    for (std::uint32_t u = 0; u < g.num_users(); ++u) {
      if (detail::is_disclosing_node(g, u)) all_disclosing.push_back(u);
    }
    if (detail::distinct_classes(g, all_disclosing) < 2) {
      fail(ErrorCode::InsufficientClasses,
           "graph carries fewer than 2 interest-disclosing classes");
    }
  }

  const std::uint64_t full_root = derive_seed(cfg.seed, 0x502);
  const std::size_t runs_per_a =
      cfg.rho_grid.size() * static_cast<std::size_t>(cfg.runs_per_pair);

  FullOutcome out;
  out.runs.resize(cfg.a_grid.size() * runs_per_a);
  std::vector<std::vector<PosthocRecord>> record_slots(out.runs.size());

  for (std::size_t ai = 0; ai < cfg.a_grid.size(); ++ai) {
    const double a = cfg.a_grid[ai];
    std::size_t inside_count = static_cast<std::size_t>(
        std::ceil(a * static_cast<double>(g.num_users())));
    if (inside_count > g.num_users()) inside_count = g.num_users();
    const std::uint64_t a_seed = derive_seed(full_root, detail::param_bits(a));

    // Step 1, once per a: the members-only view. The induced subgraph
    // holds only Inside nodes, so nothing about non-users can leak into
    // RF_a. Prefix induction keeps node indices aligned with the parent.
    RandomForestModel model;
    std::string a_skip;
    std::uint64_t training_count = 0;
    if (inside_count == 0) {
      a_skip = "empty Inside set";
    } else {
      const SocialGraph sub = induced_prefix(g, inside_count);
      std::vector<std::uint32_t> train_nodes;
      for (std::uint32_t u = 0; u < sub.num_users(); ++u) {
        if (detail::is_disclosing_node(sub, u)) train_nodes.push_back(u);
      }
      training_count = train_nodes.size();
      if (train_nodes.size() < 2) {
        a_skip = "empty training set";
      } else if (detail::distinct_classes(sub, train_nodes) < 2) {
        a_skip = "training rows carry fewer than 2 classes";
      } else {
        const FeatureLayout layout{false, 2};
        FeatureOptions opts;
        opts.include_own_profile = false;
        opts.reference_year = cfg.reference_year;
        opts.xw_count_link = cfg.xw_count_link;
        const OpenMask mask{2};

        MaskContext ctx;
        ctx.protocol = "full";
        ctx.phase = "train";
        ctx.a = a;
        ctx.inside_count = static_cast<std::uint32_t>(inside_count);

        std::vector<FeatureVector> x_train;
        std::vector<OrientationClass> y_train;
        x_train.reserve(train_nodes.size());
        y_train.reserve(train_nodes.size());
        detail::with_mask(mask, hooks, ctx, [&](const auto& m) {
          BfsScratch scratch;
          FeatureVector v;
          for (std::uint32_t u : train_nodes) {
            build_vector_into(sub, u, m, opts, layout, scratch, v);
            x_train.push_back(v);
            y_train.push_back(*sub.node_class(u));
          }
        });
        ForestConfig fc = cfg.forest;
        fc.seed = derive_seed(a_seed, 0xF0F0);
        model = train_forest(x_train, y_train, fc);
      }
    }

    std::vector<std::uint32_t> subjects;  // six-class non-users
    for (std::uint32_t u = static_cast<std::uint32_t>(inside_count); u < g.num_users();
         ++u) {
      if (detail::is_disclosing_node(g, u)) subjects.push_back(u);
    }

    parallel_for(runs_per_a, jobs, [&](std::size_t s) {
      const std::size_t rho_i = s / static_cast<std::size_t>(cfg.runs_per_pair);
      const int run = static_cast<int>(s % static_cast<std::size_t>(cfg.runs_per_pair));
      const std::size_t slot = ai * runs_per_a + s;
      out.runs[slot] = detail::full_run_one(
          g, cfg, a_seed, model, a, inside_count, training_count, subjects, a_skip,
          cfg.rho_grid[rho_i], run, hooks, record_slots[slot]);
      if (hooks.on_run_complete) hooks.on_run_complete(out.runs[slot]);
    });
  }

  for (std::vector<PosthocRecord>& slot : record_slots) {
    out.records.insert(out.records.end(), slot.begin(), slot.end());
  }

  for (double rho : cfg.rho_grid) {
    std::vector<RunResult> matching;
    for (const RunResult& r : out.runs) {
      if (r.rho == rho) matching.push_back(r);
    }
    out.per_rho.emplace_back(
        rho, detail::fit_leaks(matching, [](const RunResult& r) { return r.a; }));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Post-hoc: TPR against neighborhood structure.

struct PosthocTables {
  OrientationClass ratio_class = OrientationClass::HoM;
  std::vector<TprBin> by_d1_disclosing;       // (i) disclosing-neighbor count
  std::vector<TprBin> by_d2_size;             // (ii) 2nd-order neighborhood size
  std::vector<TprBin> by_d1_same_class_ratio; // (iii) width 0.1, ratio_class subjects
  std::vector<TprBin> by_d2_same_class_ratio; // (iv) as (iii) at distance 2
};

namespace detail {

inline std::vector<double> unit_edges(std::uint32_t max_value) {
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(max_value) + 2);
  for (std::uint32_t e = 0; e <= max_value + 1; ++e) edges.push_back(static_cast<double>(e));
  return edges;
}

inline std::vector<double> ratio_edges() {
  std::vector<double> edges;
  for (int k = 0; k <= 10; ++k) edges.push_back(static_cast<double>(k) / 10.0);
  return edges;
}

}  // namespace detail

/// Four binned-TPR tables over pooled records (a fixed (a, ρ) slice is the
/// intended input): counts use unit-width integer bins, same-class ratios
/// width-0.1 bins over classful neighbors; ratio tables consider only
/// subjects whose true class is ratio_class.
inline PosthocTables posthoc(const std::vector<PosthocRecord>& records,
                             OrientationClass ratio_class = OrientationClass::HoM) {
  PosthocTables tables;
  tables.ratio_class = ratio_class;

  auto classful = [](const std::array<std::uint32_t, kNumClasses>& counts) {
    std::uint32_t total = 0;
    for (std::uint32_t c : counts) total += c;
    return total;
  };
  auto disclosing_count = [](const std::array<std::uint32_t, kNumClasses>& counts) {
    std::uint32_t total = 0;
    for (OrientationClass c : kDisclosingClasses) {
      total += counts[static_cast<std::size_t>(c)];
    }
    return total;
  };

  std::vector<TprSubject> d1_subjects, d2_subjects, r1_subjects, r2_subjects;
  std::uint32_t d1_max = 0, d2_max = 0;
  for (const PosthocRecord& rec : records) {
    const bool is_classified = rec.predicted.has_value();
    const bool is_correct = is_classified && *rec.predicted == rec.truth;

    const std::uint32_t d1 = disclosing_count(rec.d1_class_counts);
    d1_max = std::max(d1_max, d1);
    d1_subjects.push_back({static_cast<double>(d1), is_classified, is_correct});

    d2_max = std::max(d2_max, rec.d2_total);
    d2_subjects.push_back({static_cast<double>(rec.d2_total), is_classified, is_correct});

    if (rec.truth == ratio_class) {
      const std::uint32_t c1 = classful(rec.d1_class_counts);
      if (c1 > 0) {
        const double ratio =
            static_cast<double>(
                rec.d1_class_counts[static_cast<std::size_t>(ratio_class)]) /
            static_cast<double>(c1);
        r1_subjects.push_back({ratio, is_classified, is_correct});
      }
      const std::uint32_t c2 = classful(rec.d2_class_counts);
      if (c2 > 0) {
        const double ratio =
            static_cast<double>(
                rec.d2_class_counts[static_cast<std::size_t>(ratio_class)]) /
            static_cast<double>(c2);
        r2_subjects.push_back({ratio, is_classified, is_correct});
      }
    }
  }

  tables.by_d1_disclosing = binned_tpr(d1_subjects, detail::unit_edges(d1_max));
  tables.by_d2_size = binned_tpr(d2_subjects, detail::unit_edges(d2_max));
  tables.by_d1_same_class_ratio = binned_tpr(r1_subjects, detail::ratio_edges());
  tables.by_d2_same_class_ratio = binned_tpr(r2_subjects, detail::ratio_edges());
  return tables;
}

}  // namespace shadowaudit
