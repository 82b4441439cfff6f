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

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "shadowaudit/error.hpp"
#include "shadowaudit/graph.hpp"
#include "shadowaudit/profile.hpp"

namespace shadowaudit {

/// Visibility rules one feature-extraction pass runs under. Predicates are
/// keyed by node index (= join-order rank) and must be pure for the lifetime
/// of the pass; edge_present must be symmetric.
///
/// Any type with the same three members works where a mask is expected; this
/// std::function-based form is the general-purpose one.
struct VisibilityMask {
  std::function<bool(std::uint32_t)> attribute_visible;
  std::function<bool(std::uint32_t, std::uint32_t)> edge_present;
  int max_distance = 3;
};

/// Mask that hides nothing.
struct OpenMask {
  int max_distance = 3;
  bool attribute_visible(std::uint32_t) const { return true; }
  bool edge_present(std::uint32_t, std::uint32_t) const { return true; }
};

/// Feature vectors are flat doubles; FeatureLayout fixes the meaning of
/// every position.
using FeatureVector = std::vector<double>;

inline constexpr int kGenderValues = 3;       // M, F, U
inline constexpr int kRelationshipValues = 5;
inline constexpr int kOwnBlockSize = 1 + kGenderValues + kRelationshipValues;
inline constexpr int kPerDistanceBlockSize =
    2 + kGenderValues + kRelationshipValues + kNumInterests + kNumClasses;  // 28

/// Flattened component order:
///   [own block: age, gender one-hot ×3, relationship one-hot ×5]?   (9, optional)
///   for k = 1..max_distance:
///     [n_k, a_k, g_k ×3, r_k ×5, i_k ×10, x_k ×8]                    (28 each)
///   [x_w ×8]
/// Enum order within blocks: Gender {M,F,U}, Relationship and Interest in
/// declaration order, classes in kAllClasses order.
struct FeatureLayout {
  bool own_profile = false;
  int max_distance = 3;

  std::size_t dim() const {
    return (own_profile ? kOwnBlockSize : 0) +
           static_cast<std::size_t>(max_distance) * kPerDistanceBlockSize + kNumClasses;
  }

  std::size_t own_offset() const { return 0; }
  std::size_t block_offset(int k) const {  // k is 1-based
    return (own_profile ? kOwnBlockSize : 0) +
           static_cast<std::size_t>(k - 1) * kPerDistanceBlockSize;
  }
  std::size_t xw_offset() const {
    return (own_profile ? kOwnBlockSize : 0) +
           static_cast<std::size_t>(max_distance) * kPerDistanceBlockSize;
  }

  std::size_t index_nk(int k) const { return block_offset(k); }
  std::size_t index_ak(int k) const { return block_offset(k) + 1; }
  std::size_t index_gk(int k, Gender g) const {
    return block_offset(k) + 2 + static_cast<std::size_t>(g);
  }
  std::size_t index_rk(int k, Relationship r) const {
    return block_offset(k) + 2 + kGenderValues + static_cast<std::size_t>(r);
  }
  std::size_t index_ik(int k, Interest i) const {
    return block_offset(k) + 2 + kGenderValues + kRelationshipValues +
           static_cast<std::size_t>(i);
  }
  std::size_t index_xk(int k, OrientationClass c) const {
    return block_offset(k) + 2 + kGenderValues + kRelationshipValues + kNumInterests +
           static_cast<std::size_t>(c);
  }
  std::size_t index_xw(OrientationClass c) const {
    return xw_offset() + static_cast<std::size_t>(c);
  }

  /// Names of all components in flattened order (CSV header, report metadata).
  std::vector<std::string> component_names() const {
    static constexpr const char* kInterestTokens[kNumInterests] = {
        "Friends", "ActivityPartners", "JustLookingAround", "Fans",
        "DatingWomen", "RelationshipWithWomen", "DatingMen", "RelationshipWithMen",
        "DatingMenAndWomen", "RelationshipWithMenAndWomen"};
    static constexpr const char* kRelTokens[kRelationshipValues] = {
        "Single", "Married", "InARelationship", "DomesticPartners", "ItsComplicated"};
    static constexpr const char* kGenderTokens[kGenderValues] = {"M", "F", "U"};

    std::vector<std::string> names;
    names.reserve(dim());
    if (own_profile) {
      names.push_back("own_age");
      for (const char* g : kGenderTokens) names.push_back(std::string("own_gender_") + g);
      for (const char* r : kRelTokens) names.push_back(std::string("own_rel_") + r);
    }
    for (int k = 1; k <= max_distance; ++k) {
      const std::string suffix = "_" + std::to_string(k);
      names.push_back("n" + suffix);
      names.push_back("a" + suffix);
      for (const char* g : kGenderTokens) names.push_back("g" + suffix + "_" + g);
      for (const char* r : kRelTokens) names.push_back("r" + suffix + "_" + r);
      for (const char* i : kInterestTokens) names.push_back("i" + suffix + "_" + i);
      for (OrientationClass c : kAllClasses)
        names.push_back("x" + suffix + "_" + to_string(c));
    }
    for (OrientationClass c : kAllClasses) names.push_back(std::string("x_w_") + to_string(c));
    return names;
  }
};

/// Extraction options beyond the mask itself.
struct FeatureOptions {
  bool include_own_profile = false;
  int reference_year = 2008;  // ages are reference_year - birth_year
  /// When true, x_w weights each distance-1 link by 1 + common friends
  /// instead of the raw common-friend count.
  bool xw_count_link = false;
};

/// Reusable per-thread BFS state; lets repeated extractions over one graph
/// avoid reallocation. One instance must not be shared across threads.
class BfsScratch {
 public:
  void ensure(std::size_t n) {
    if (stamp_.size() < n) stamp_.assign(n, 0);
  }
  /// Starts a fresh traversal epoch; returns the stamp value to mark with.
  std::uint32_t begin_epoch() {
    if (++epoch_ == 0) {  // wrapped: clear stamps once every 2^32 epochs
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    return epoch_;
  }
  bool seen(std::uint32_t v) const { return stamp_[v] == epoch_; }
  void mark(std::uint32_t v) { stamp_[v] = epoch_; }

  std::vector<std::uint32_t> frontier;
  std::vector<std::uint32_t> next;
  std::vector<std::uint32_t> layer1;

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

namespace detail {

inline void check_node(const SocialGraph& g, std::uint32_t u) {
  if (u >= g.num_users()) {
    fail(ErrorCode::UnknownUser, "node index " + std::to_string(u) + " out of range");
  }
}

}  // namespace detail

/// Breadth-first layers of exact distance 1..max_distance from u, following
/// only edges that pass mask.edge_present. Layer contents are sorted.
template <typename Mask>
std::vector<std::vector<std::uint32_t>> exact_distance_sets(const SocialGraph& g,
                                                            std::uint32_t u,
                                                            const Mask& mask) {
  detail::check_node(g, u);
  std::vector<std::vector<std::uint32_t>> layers(
      static_cast<std::size_t>(mask.max_distance));
  std::vector<std::uint8_t> seen(g.num_users(), 0);
  seen[u] = 1;
  std::vector<std::uint32_t> frontier{u};
  for (int k = 1; k <= mask.max_distance && !frontier.empty(); ++k) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t v : frontier) {
      for (std::uint32_t w : g.neighbors(v)) {
        if (seen[w] || !mask.edge_present(v, w)) continue;
        seen[w] = 1;
        next.push_back(w);
      }
    }
    std::sort(next.begin(), next.end());
    layers[static_cast<std::size_t>(k - 1)] = next;
    frontier = std::move(next);
  }
  return layers;
}

/// Core extraction: writes the feature vector for node u into `out`
/// (resized and zeroed here). Layout must agree with the mask's
/// max_distance and opts.include_own_profile.
template <typename Mask>
void build_vector_into(const SocialGraph& g, std::uint32_t u, const Mask& mask,
                       const FeatureOptions& opts, const FeatureLayout& layout,
                       BfsScratch& scratch, FeatureVector& out) {
  detail::check_node(g, u);
  out.assign(layout.dim(), 0.0);

  if (layout.own_profile && mask.attribute_visible(u)) {
    const Profile& p = g.profile(u);
    if (p.birth_year) {
      out[layout.own_offset()] = static_cast<double>(opts.reference_year - *p.birth_year);
    }
    out[layout.own_offset() + 1 + static_cast<std::size_t>(p.gender)] = 1.0;
    if (p.relationship) {
      out[layout.own_offset() + 1 + kGenderValues +
          static_cast<std::size_t>(*p.relationship)] = 1.0;
    }
  }

  scratch.ensure(g.num_users());
  scratch.begin_epoch();
  scratch.mark(u);
  scratch.frontier.clear();
  scratch.frontier.push_back(u);
  scratch.layer1.clear();

  for (int k = 1; k <= layout.max_distance && !scratch.frontier.empty(); ++k) {
    scratch.next.clear();
    for (std::uint32_t v : scratch.frontier) {
      for (std::uint32_t w : g.neighbors(v)) {
        if (scratch.seen(w) || !mask.edge_present(v, w)) continue;
        scratch.mark(w);
        scratch.next.push_back(w);
      }
    }

    const std::size_t base = layout.block_offset(k);
    out[base] = static_cast<double>(scratch.next.size());  // n_k
    double age_sum = 0.0;
    std::size_t age_count = 0;
    for (std::uint32_t w : scratch.next) {
      if (!mask.attribute_visible(w)) continue;
      const Profile& p = g.profile(w);
      if (p.birth_year) {
        age_sum += static_cast<double>(opts.reference_year - *p.birth_year);
        ++age_count;
      }
      out[layout.index_gk(k, p.gender)] += 1.0;
      if (p.relationship) out[layout.index_rk(k, *p.relationship)] += 1.0;
      for (int i = 0; i < kNumInterests; ++i) {
        Interest interest = static_cast<Interest>(i);
        if (p.interests.contains(interest)) out[layout.index_ik(k, interest)] += 1.0;
      }
      if (auto c = g.node_class(w)) out[layout.index_xk(k, *c)] += 1.0;
    }
    if (age_count > 0) out[layout.index_ak(k)] = age_sum / static_cast<double>(age_count);

    if (k == 1) scratch.layer1 = scratch.next;
    std::swap(scratch.frontier, scratch.next);
  }

  // x_w: distance-1 neighbors of visible class, weighted by common friends
  // (shared neighbors reachable through surviving edges on both sides).
  for (std::uint32_t v : scratch.layer1) {
    if (!mask.attribute_visible(v)) continue;
    auto c = g.node_class(v);
    if (!c) continue;
    std::size_t common = 0;
    auto nu = g.neighbors(u);
    auto nv = g.neighbors(v);
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
      if (nu[i] < nv[j]) {
        ++i;
      } else if (nu[i] > nv[j]) {
        ++j;
      } else {
        std::uint32_t w = nu[i];
        if (mask.edge_present(u, w) && mask.edge_present(v, w)) ++common;
        ++i;
        ++j;
      }
    }
    double weight = static_cast<double>(common) + (opts.xw_count_link ? 1.0 : 0.0);
    out[layout.index_xw(*c)] += weight;
  }
}

/// Convenience form: allocates its own scratch and returns the vector.
template <typename Mask>
FeatureVector build_vector(const SocialGraph& g, std::uint32_t u, const Mask& mask,
                           const FeatureOptions& opts = {}) {
  FeatureLayout layout{opts.include_own_profile, mask.max_distance};
  BfsScratch scratch;
  FeatureVector out;
  build_vector_into(g, u, mask, opts, layout, scratch, out);
  return out;
}

/// Debug dump: one row per vector, header names every component.
inline void write_features_csv(const std::string& path, const FeatureLayout& layout,
                               const std::vector<std::uint32_t>& user_ids,
                               const std::vector<FeatureVector>& rows) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open for write: " + path);
  f << "user_id";
  for (const std::string& name : layout.component_names()) f << ',' << name;
  f << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != layout.dim()) {
      fail(ErrorCode::DimensionMismatch, "feature row does not match layout");
    }
    f << user_ids[r];
    for (double v : rows[r]) f << ',' << v;
    f << '\n';
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace shadowaudit
