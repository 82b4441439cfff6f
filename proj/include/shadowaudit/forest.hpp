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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowaudit/error.hpp"
#include "shadowaudit/features.hpp"
#include "shadowaudit/profile.hpp"
#include "shadowaudit/rng.hpp"

namespace shadowaudit {

struct ForestConfig {
  int n_trees = 100;
  std::optional<int> max_depth;      // unbounded when absent
  int min_samples_split = 2;
  std::optional<int> mtry;           // ⌊√d⌋ when absent
  std::uint64_t seed = 0;
};

/// One node of a decision tree. feature == -1 marks a leaf; a leaf stores
/// its majority class in `left` and the offset of its class-count vector
/// (class_list.size() entries) in `right`.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> leaf_counts;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    if (a.leaf_counts != b.leaf_counts || a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      const TreeNode& x = a.nodes[i];
      const TreeNode& y = b.nodes[i];
      if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
          x.right != y.right) {
        return false;
      }
    }
    return true;
  }
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::vector<OrientationClass> class_list;  // ascending enum order
  std::size_t feature_dim = 0;
  ForestConfig config;

  friend bool operator==(const RandomForestModel& a, const RandomForestModel& b) {
    return a.trees == b.trees && a.class_list == b.class_list &&
           a.feature_dim == b.feature_dim;
  }
};

namespace detail {

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double children_score = 0.0;  // Σ_side (Σ_c count²) / size; higher is purer
};

struct SplitWorkspace {
  std::vector<std::pair<double, std::uint8_t>> sorted;  // (value, label)
  std::vector<std::uint32_t> left_counts;
  std::vector<std::uint32_t> total_counts;
  std::vector<std::uint32_t> partition;
  std::vector<int> feature_pool;
};

/// Exhaustive best split over the given features (ascending) for the sample
/// multiset. Candidate thresholds are midpoints between consecutive distinct
/// values; rule is `value < threshold → left`. Ties prefer the lower feature
/// index, then the lower threshold (guaranteed by ascending scan order and
/// strictly-greater comparisons).
///
/// `columns` is column-major: feature f of row i at columns[f * n_rows + i].
inline SplitCandidate find_best_split(std::span<const double> columns,
                                      std::size_t n_rows,
                                      std::span<const std::uint8_t> labels,
                                      std::span<const std::uint32_t> samples,
                                      std::span<const int> features,
                                      int num_classes, SplitWorkspace& ws) {
  const std::size_t m = samples.size();
  SplitCandidate best;
  if (m < 2) return best;

  ws.sorted.resize(m);
  ws.left_counts.assign(static_cast<std::size_t>(num_classes), 0);
  ws.total_counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (std::uint32_t s : samples) ++ws.total_counts[labels[s]];

  for (int f : features) {
    const double* col = columns.data() + static_cast<std::size_t>(f) * n_rows;
    double lo = col[samples[0]], hi = lo;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = col[samples[i]];
      ws.sorted[i] = {v, labels[samples[i]]};
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) continue;  // constant feature here

    std::sort(ws.sorted.begin(), ws.sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::fill(ws.left_counts.begin(), ws.left_counts.end(), 0);
    std::uint64_t left_ss = 0;  // Σ_c left_count_c², updated incrementally
    std::uint64_t right_ss = 0;
    for (int c = 0; c < num_classes; ++c) {
      right_ss += static_cast<std::uint64_t>(ws.total_counts[c]) * ws.total_counts[c];
    }

    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::uint8_t c = ws.sorted[i].second;
      // moving one sample of class c from right to left changes each
      // side's sum of squares by ±(2·count±1)
      left_ss += 2ULL * ws.left_counts[c] + 1;
      right_ss -= 2ULL * ws.total_counts[c] - 2ULL * ws.left_counts[c] - 1;
      ++ws.left_counts[c];

      const double a = ws.sorted[i].first;
      const double b = ws.sorted[i + 1].first;
      if (a == b) continue;  // not a value boundary

      const double n_left = static_cast<double>(i + 1);
      const double n_right = static_cast<double>(m - i - 1);
      const double score = static_cast<double>(left_ss) / n_left +
                           static_cast<double>(right_ss) / n_right;
      if (!best.found || score > best.children_score) {
        double thr = a + (b - a) / 2.0;
        if (!(thr > a)) thr = b;  // midpoint collapsed onto a
        best.found = true;
        best.feature = f;
        best.threshold = thr;
        best.children_score = score;
      }
    }
  }
  return best;
}

inline void grow_tree(std::span<const double> columns, std::size_t n_rows,
                      std::span<const std::uint8_t> labels, int num_classes,
                      const ForestConfig& cfg, int mtry, std::size_t dim, Rng& rng,
                      std::vector<std::uint32_t>& sample, SplitWorkspace& ws,
                      DecisionTree& tree) {
  struct WorkItem {
    std::uint32_t lo, hi, node;
    int depth;
  };

  // Identity pool at entry keeps every tree a pure function of its own RNG.
  ws.feature_pool.resize(dim);
  for (std::size_t f = 0; f < dim; ++f) ws.feature_pool[f] = static_cast<int>(f);

  std::vector<int> chosen(static_cast<std::size_t>(mtry));
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(num_classes));
  std::vector<WorkItem> stack;

  tree.nodes.clear();
  tree.leaf_counts.clear();
  tree.nodes.emplace_back();
  stack.push_back({0, static_cast<std::uint32_t>(sample.size()), 0, 0});

  while (!stack.empty()) {
    WorkItem item = stack.back();
    stack.pop_back();
    const std::size_t m = item.hi - item.lo;

    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint32_t i = item.lo; i < item.hi; ++i) ++counts[labels[sample[i]]];
    int present = 0;
    for (std::uint32_t c : counts) present += c > 0;

    auto make_leaf = [&] {
      TreeNode& node = tree.nodes[item.node];
      node.feature = -1;
      std::uint32_t best_class = 0;
      for (int c = 1; c < num_classes; ++c) {
        if (counts[c] > counts[best_class]) best_class = static_cast<std::uint32_t>(c);
      }
      node.left = best_class;
      node.right = static_cast<std::uint32_t>(tree.leaf_counts.size());
      tree.leaf_counts.insert(tree.leaf_counts.end(), counts.begin(), counts.end());
    };

    const bool depth_capped = cfg.max_depth && item.depth >= *cfg.max_depth;
    if (present <= 1 || m < static_cast<std::size_t>(cfg.min_samples_split) ||
        depth_capped) {
      make_leaf();
      continue;
    }

    // mtry features without replacement (partial Fisher-Yates), then sorted
    // ascending so tie-breaks are by feature index.
    for (int j = 0; j < mtry; ++j) {
      const std::size_t k =
          static_cast<std::size_t>(j) +
          static_cast<std::size_t>(rng.uniform_below(dim - static_cast<std::size_t>(j)));
      std::swap(ws.feature_pool[static_cast<std::size_t>(j)], ws.feature_pool[k]);
      chosen[static_cast<std::size_t>(j)] = ws.feature_pool[static_cast<std::size_t>(j)];
    }
    std::sort(chosen.begin(), chosen.end());

    SplitCandidate split = find_best_split(
        columns, n_rows, labels,
        std::span<const std::uint32_t>(sample.data() + item.lo, m), chosen,
        num_classes, ws);
    if (!split.found) {
      make_leaf();
      continue;
    }

    // Stable partition: left side keeps relative order, then right side.
    ws.partition.clear();
    const double* col = columns.data() + static_cast<std::size_t>(split.feature) * n_rows;
    for (std::uint32_t i = item.lo; i < item.hi; ++i) {
      if (col[sample[i]] < split.threshold) ws.partition.push_back(sample[i]);
    }
    const std::uint32_t mid = item.lo + static_cast<std::uint32_t>(ws.partition.size());
    for (std::uint32_t i = item.lo; i < item.hi; ++i) {
      if (!(col[sample[i]] < split.threshold)) ws.partition.push_back(sample[i]);
    }
    std::copy(ws.partition.begin(), ws.partition.end(), sample.begin() + item.lo);

    const std::uint32_t left_index = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes[item.node].feature = split.feature;
    tree.nodes[item.node].threshold = split.threshold;
    tree.nodes[item.node].left = left_index;
    tree.nodes[item.node].right = left_index + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back({mid, item.hi, left_index + 1, item.depth + 1});
    stack.push_back({item.lo, mid, left_index, item.depth + 1});
  }
}

}  // namespace detail

/// Trains a random forest: each tree on a bootstrap sample of the rows,
/// mtry features per split, Gini impurity. Deterministic given cfg.seed.
inline RandomForestModel train_forest(const std::vector<FeatureVector>& rows,
                                      const std::vector<OrientationClass>& labels,
                                      const ForestConfig& cfg) {
  if (rows.size() != labels.size()) {
    fail(ErrorCode::DimensionMismatch, "rows and labels differ in length");
  }
  if (rows.size() < 2) {
    fail(ErrorCode::DegenerateTraining, "need at least 2 training rows");
  }
  if (cfg.n_trees < 1) fail(ErrorCode::InvalidConfig, "n_trees must be positive");
  if (cfg.min_samples_split < 2) {
    fail(ErrorCode::InvalidConfig, "min_samples_split must be at least 2");
  }
  if (cfg.max_depth && *cfg.max_depth < 1) {
    fail(ErrorCode::InvalidConfig, "max_depth must be at least 1");
  }

  const std::size_t n = rows.size();
  const std::size_t d = rows[0].size();
  if (d == 0) fail(ErrorCode::DegenerateTraining, "feature vectors are empty");
  for (const FeatureVector& r : rows) {
    if (r.size() != d) fail(ErrorCode::DimensionMismatch, "inconsistent feature dimensions");
  }

  RandomForestModel model;
  model.feature_dim = d;
  model.config = cfg;

  bool class_seen[kNumClasses] = {};
  for (OrientationClass c : labels) class_seen[static_cast<std::size_t>(c)] = true;
  for (OrientationClass c : kAllClasses) {
    if (class_seen[static_cast<std::size_t>(c)]) model.class_list.push_back(c);
  }
  if (model.class_list.size() < 2) {
    fail(ErrorCode::DegenerateTraining, "training rows carry fewer than 2 classes");
  }
  const int num_classes = static_cast<int>(model.class_list.size());

  std::uint8_t class_index[kNumClasses] = {};
  for (std::size_t i = 0; i < model.class_list.size(); ++i) {
    class_index[static_cast<std::size_t>(model.class_list[i])] =
        static_cast<std::uint8_t>(i);
  }
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = class_index[static_cast<std::size_t>(labels[i])];

  int mtry = cfg.mtry ? *cfg.mtry
                      : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));
  if (mtry < 1 || static_cast<std::size_t>(mtry) > d) {
    fail(ErrorCode::InvalidConfig, "mtry out of range [1, feature_dim]");
  }

  // Column-major copy: sequential access within one feature during splits.
  std::vector<double> columns(d * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) columns[f * n + i] = rows[i][f];
  }

  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  detail::SplitWorkspace ws;
  std::vector<std::uint32_t> sample(n);
  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.seed, 0x54524545ULL, static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = static_cast<std::uint32_t>(rng.uniform_below(n));
    }
    std::sort(sample.begin(), sample.end());
    detail::grow_tree(columns, n, y, num_classes, cfg, mtry, d, rng, sample, ws,
                      model.trees[static_cast<std::size_t>(t)]);
  }
  return model;
}

/// Majority vote over the trees' leaf-majority classes; ties go to the
/// class earliest in class_list.
inline OrientationClass predict(const RandomForestModel& model, const FeatureVector& v) {
  if (v.size() != model.feature_dim) {
    fail(ErrorCode::DimensionMismatch,
         "input has dimension " + std::to_string(v.size()) + ", model expects " +
             std::to_string(model.feature_dim));
  }
  std::uint32_t votes[kNumClasses] = {};
  for (const DecisionTree& tree : model.trees) {
    std::uint32_t at = 0;
    for (;;) {
      const TreeNode& node = tree.nodes[at];
      if (node.feature < 0) {
        ++votes[node.left];
        break;
      }
      at = v[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                      : node.right;
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < model.class_list.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return model.class_list[best];
}

inline std::vector<OrientationClass> predict_batch(const RandomForestModel& model,
                                                   const std::vector<FeatureVector>& vs) {
  std::vector<OrientationClass> out;
  out.reserve(vs.size());
  for (const FeatureVector& v : vs) out.push_back(predict(model, v));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization (versioned JSON, round-trip stable).

inline constexpr int kForestFormatVersion = 1;

inline nlohmann::json forest_to_json(const RandomForestModel& model) {
  nlohmann::json j;
  j["format_version"] = kForestFormatVersion;
  j["algorithm"] = "random_forest";
  j["feature_dim"] = model.feature_dim;
  nlohmann::json classes = nlohmann::json::array();
  for (OrientationClass c : model.class_list) classes.push_back(to_string(c));
  j["class_list"] = classes;
  j["config"] = {
      {"n_trees", model.config.n_trees},
      {"max_depth", model.config.max_depth ? nlohmann::json(*model.config.max_depth)
                                           : nlohmann::json(nullptr)},
      {"min_samples_split", model.config.min_samples_split},
      {"mtry", model.config.mtry ? nlohmann::json(*model.config.mtry)
                                 : nlohmann::json(nullptr)},
      {"seed", model.config.seed},
      {"rng", kRngAlgorithm},
  };
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      nodes.push_back({node.feature, node.threshold, node.left, node.right});
    }
    trees.push_back({{"nodes", std::move(nodes)}, {"leaf_counts", tree.leaf_counts}});
  }
  j["trees"] = std::move(trees);
  return j;
}

inline void save_forest(const RandomForestModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open for write: " + path);
  f << forest_to_json(model).dump() << '\n';
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

inline RandomForestModel forest_from_json(const nlohmann::json& j) {
  RandomForestModel model;
  try {
    if (j.at("format_version").get<int>() != kForestFormatVersion) {
      fail(ErrorCode::ParseError, "unsupported model format_version");
    }
    model.feature_dim = j.at("feature_dim").get<std::size_t>();
    for (const auto& name : j.at("class_list")) {
      model.class_list.push_back(parse_class(name.get<std::string>()));
    }
    const auto& cfg = j.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    if (!cfg.at("max_depth").is_null()) model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    if (!cfg.at("mtry").is_null()) model.config.mtry = cfg.at("mtry").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("trees")) {
      DecisionTree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode node;
        node.feature = jn.at(0).get<std::int32_t>();
        node.threshold = jn.at(1).get<double>();
        node.left = jn.at(2).get<std::uint32_t>();
        node.right = jn.at(3).get<std::uint32_t>();
        if (node.feature >= 0 &&
            static_cast<std::size_t>(node.feature) >= model.feature_dim) {
          fail(ErrorCode::ParseError, "model node references feature out of range");
        }
        tree.nodes.push_back(node);
      }
      tree.leaf_counts = jt.at("leaf_counts").get<std::vector<std::uint32_t>>();
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
  }
  return model;
}

inline RandomForestModel load_forest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open model file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
  }
  return forest_from_json(j);
}

}  // namespace shadowaudit
