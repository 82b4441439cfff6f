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

#include "shadowaudit/features.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "shadowaudit/rng.hpp"

namespace shadowaudit {
namespace {

Profile make_profile(std::uint32_t id, OrientationClass c) {
  Profile p;
  p.user_id = id;
  const auto [gender, interests] = canonical_profile_fields(c);
  p.gender = gender;
  p.interests = interests;
  return p;
}

TEST(Layout, DimsAndOffsets) {
  const FeatureLayout no_own{false, 3};
  EXPECT_EQ(no_own.dim(), 3u * 28 + 8);
  const FeatureLayout with_own{true, 2};
  EXPECT_EQ(with_own.dim(), 9u + 2 * 28 + 8);
  EXPECT_EQ(no_own.index_nk(1), 0u);
  EXPECT_EQ(no_own.index_nk(2), 28u);
  EXPECT_EQ(no_own.index_ak(1), 1u);
  EXPECT_EQ(no_own.index_gk(1, Gender::Male), 2u);
  EXPECT_EQ(no_own.index_rk(1, Relationship::Single), 5u);
  EXPECT_EQ(no_own.index_ik(1, Interest::Friends), 10u);
  EXPECT_EQ(no_own.index_xk(1, OrientationClass::FF), 20u);
  EXPECT_EQ(no_own.index_xw(OrientationClass::FF), 84u);
  EXPECT_EQ(with_own.index_nk(1), 9u);
}

TEST(Layout, NamesAlignWithIndices) {
  const FeatureLayout layout{true, 2};
  const auto names = layout.component_names();
  ASSERT_EQ(names.size(), layout.dim());
  EXPECT_EQ(names[layout.own_offset()], "own_age");
  EXPECT_EQ(names[layout.index_nk(1)], "n_1");
  EXPECT_EQ(names[layout.index_ak(2)], "a_2");
  EXPECT_EQ(names[layout.index_gk(1, Gender::Female)], "g_1_F");
  EXPECT_EQ(names[layout.index_rk(2, Relationship::ItsComplicated)],
            "r_2_ItsComplicated");
  EXPECT_EQ(names[layout.index_ik(1, Interest::DatingMenAndWomen)],
            "i_1_DatingMenAndWomen");
  EXPECT_EQ(names[layout.index_xk(2, OrientationClass::HoM)], "x_2_HoM");
  EXPECT_EQ(names[layout.index_xw(OrientationClass::BiM)], "x_w_BiM");
}

// Hand-computable fixture: focal node 0 with a triangle, a hidden friend,
// and a two-step tail.
//
//   0 -- 1 -- 4 -- 5        plus 0-2, 0-3, 1-2 (triangle 0-1-2)
class HandGraphTest : public ::testing::Test {
 protected:
  static SocialGraph make() {
    std::vector<Profile> profiles;
    Profile p0 = make_profile(0, OrientationClass::HeF);
    p0.birth_year = 1980;
    Profile p1 = make_profile(1, OrientationClass::HeM);
    p1.birth_year = 1985;
    p1.relationship = Relationship::Single;
    p1.interests.add(Interest::Friends);
    Profile p2 = make_profile(2, OrientationClass::FF);
    p2.relationship = Relationship::Married;
    Profile p3 = make_profile(3, OrientationClass::BiM);
    p3.birth_year = 1990;
    Profile p4 = make_profile(4, OrientationClass::HoF);
    p4.birth_year = 1970;
    Profile p5 = make_profile(5, OrientationClass::FM);
    profiles = {p0, p1, p2, p3, p4, p5};
    return SocialGraph::build(profiles,
                              {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 4}, {4, 5}});
  }

  // Node 3's attributes are dark; every edge persists.
  static VisibilityMask hide3(int max_distance) {
    VisibilityMask m;
    m.attribute_visible = [](std::uint32_t u) { return u != 3; };
    m.edge_present = [](std::uint32_t, std::uint32_t) { return true; };
    m.max_distance = max_distance;
    return m;
  }
};

TEST_F(HandGraphTest, ExactDistanceLayers) {
  const SocialGraph g = make();
  const auto layers = exact_distance_sets(g, 0, hide3(3));
  ASSERT_EQ(layers.size(), 3u);
  EXPECT_EQ(layers[0], (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_EQ(layers[1], (std::vector<std::uint32_t>{4}));
  EXPECT_EQ(layers[2], (std::vector<std::uint32_t>{5}));
}

TEST_F(HandGraphTest, FeatureVectorMatchesHandComputation) {
  const SocialGraph g = make();
  const FeatureLayout layout{false, 3};
  const FeatureVector v = build_vector(g, 0, hide3(3));
  ASSERT_EQ(v.size(), layout.dim());

  FeatureVector want(layout.dim(), 0.0);
  // Distance 1: {1, 2, 3}; 3 is invisible so only population counts it.
  want[layout.index_nk(1)] = 3;
  want[layout.index_ak(1)] = 2008 - 1985;  // only node 1 has a visible age
  want[layout.index_gk(1, Gender::Male)] = 1;
  want[layout.index_gk(1, Gender::Female)] = 1;
  want[layout.index_rk(1, Relationship::Single)] = 1;
  want[layout.index_rk(1, Relationship::Married)] = 1;
  want[layout.index_ik(1, Interest::DatingWomen)] = 1;
  want[layout.index_ik(1, Interest::Friends)] = 1;
  want[layout.index_xk(1, OrientationClass::HeM)] = 1;
  want[layout.index_xk(1, OrientationClass::FF)] = 1;
  // Distance 2: {4}.
  want[layout.index_nk(2)] = 1;
  want[layout.index_ak(2)] = 2008 - 1970;
  want[layout.index_gk(2, Gender::Female)] = 1;
  want[layout.index_ik(2, Interest::DatingWomen)] = 1;
  want[layout.index_xk(2, OrientationClass::HoF)] = 1;
  // Distance 3: {5}; no birth year anywhere, so a_3 stays 0.
  want[layout.index_nk(3)] = 1;
  want[layout.index_gk(3, Gender::Male)] = 1;
  want[layout.index_xk(3, OrientationClass::FM)] = 1;
  // x_w: node 1 (HeM) shares friend 2 with the focal node; node 2 (FF)
  // shares friend 1. Node 3 is invisible and contributes nothing.
  want[layout.index_xw(OrientationClass::HeM)] = 1;
  want[layout.index_xw(OrientationClass::FF)] = 1;

  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_DOUBLE_EQ(v[i], want[i]) << "component " << i;
  }
}

TEST_F(HandGraphTest, LinkWeightOptionAddsOnePerFriend) {
  const SocialGraph g = make();
  const FeatureLayout layout{false, 3};
  FeatureOptions opts;
  opts.xw_count_link = true;
  const FeatureVector v = build_vector(g, 0, hide3(3), opts);
  EXPECT_DOUBLE_EQ(v[layout.index_xw(OrientationClass::HeM)], 2.0);
  EXPECT_DOUBLE_EQ(v[layout.index_xw(OrientationClass::FF)], 2.0);
  // Still nothing from the invisible node.
  EXPECT_DOUBLE_EQ(v[layout.index_xw(OrientationClass::BiM)], 0.0);
}

TEST_F(HandGraphTest, RemovedEdgeRedirectsLayers) {
  const SocialGraph g = make();
  VisibilityMask m = hide3(3);
  m.edge_present = [](std::uint32_t a, std::uint32_t b) {
    return !((a == 0 && b == 1) || (a == 1 && b == 0));
  };
  const auto layers = exact_distance_sets(g, 0, m);
  EXPECT_EQ(layers[0], (std::vector<std::uint32_t>{2, 3}));
  EXPECT_EQ(layers[1], (std::vector<std::uint32_t>{1}));  // via the triangle
  EXPECT_EQ(layers[2], (std::vector<std::uint32_t>{4}));

  // x_w now sees node 2 only through common friend 1, but edge 0-1 is gone.
  const FeatureLayout layout{false, 3};
  const FeatureVector v = build_vector(g, 0, m);
  EXPECT_DOUBLE_EQ(v[layout.index_xw(OrientationClass::FF)], 0.0);
}

TEST_F(HandGraphTest, OwnProfileBlockGatedByVisibility) {
  const SocialGraph g = make();
  FeatureOptions opts;
  opts.include_own_profile = true;
  const FeatureLayout layout{true, 3};
  const FeatureVector v = build_vector(g, 0, hide3(3), opts);
  EXPECT_DOUBLE_EQ(v[layout.own_offset()], 28.0);  // 2008 - 1980
  EXPECT_DOUBLE_EQ(v[layout.own_offset() + 1 + static_cast<std::size_t>(Gender::Female)],
                   1.0);

  VisibilityMask dark = hide3(3);
  dark.attribute_visible = [](std::uint32_t u) { return u != 0 && u != 3; };
  const FeatureVector hidden_self = build_vector(g, 0, dark, opts);
  for (std::size_t i = 0; i < kOwnBlockSize; ++i) {
    EXPECT_DOUBLE_EQ(hidden_self[i], 0.0) << "own component " << i;
  }
}

TEST(Features, UnknownNodeIndexThrows) {
  const SocialGraph g = SocialGraph::build({make_profile(0, OrientationClass::FF)}, {});
  EXPECT_THROW(build_vector(g, 5, OpenMask{3}), AuditError);
  EXPECT_THROW(exact_distance_sets(g, 5, OpenMask{3}), AuditError);
}

TEST(Features, IsolatedNodeIsAllZero) {
  std::vector<Profile> profiles = {make_profile(0, OrientationClass::FF),
                                   make_profile(1, OrientationClass::HeM)};
  const SocialGraph g = SocialGraph::build(profiles, {});
  const FeatureVector v = build_vector(g, 0, OpenMask{3});
  for (double x : v) EXPECT_DOUBLE_EQ(x, 0.0);
}

// ---------------------------------------------------------------------------
// Randomized oracle: exhaustive BFS and common-neighbor recomputation on
// small Erdos-Renyi graphs under random masks.

struct RandomCase {
  SocialGraph graph;
  std::vector<std::uint8_t> visible;
  std::set<std::uint64_t> dropped;  // canonical (lo<<32)|hi edge keys
  int max_distance = 3;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

RandomCase make_case(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 5 + rng.uniform_below(26);  // 5..30
  std::vector<Profile> profiles;
  for (std::size_t i = 0; i < n; ++i) {
    Profile p;
    p.user_id = static_cast<std::uint32_t>(i);
    if (rng.bernoulli(0.9)) {
      const auto c = kAllClasses[rng.uniform_below(kNumClasses)];
      const auto [gender, interests] = canonical_profile_fields(c);
      p.gender = gender;
      p.interests = interests;
      if (rng.bernoulli(0.3)) p.interests.add(Interest::Friends);
    }
    if (rng.bernoulli(0.7)) p.birth_year = 1950 + static_cast<int>(rng.uniform_below(46));
    if (rng.bernoulli(0.5)) {
      p.relationship = static_cast<Relationship>(rng.uniform_below(5));
    }
    profiles.push_back(p);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(0.2)) edges.emplace_back(i, j);
    }
  }
  RandomCase c;
  c.graph = SocialGraph::build(std::move(profiles), edges);
  c.visible.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.visible[i] = rng.bernoulli(0.7) ? 1 : 0;
  for (const auto& [a, b] : edges) {
    if (rng.bernoulli(0.2)) c.dropped.insert(edge_key(a, b));
  }
  c.max_distance = 1 + static_cast<int>(rng.uniform_below(3));
  return c;
}

VisibilityMask case_mask(const RandomCase& c) {
  VisibilityMask m;
  m.attribute_visible = [&c](std::uint32_t u) { return c.visible[u] != 0; };
  m.edge_present = [&c](std::uint32_t a, std::uint32_t b) {
    return c.dropped.find(edge_key(a, b)) == c.dropped.end();
  };
  m.max_distance = c.max_distance;
  return m;
}

// Naive O(n^2) BFS over the masked adjacency matrix.
std::vector<int> oracle_distances(const RandomCase& c, std::uint32_t u) {
  const std::size_t n = c.graph.num_users();
  std::vector<int> dist(n, -1);
  dist[u] = 0;
  std::vector<std::uint32_t> frontier{u};
  int d = 0;
  while (!frontier.empty()) {
    ++d;
    std::vector<std::uint32_t> next;
    for (std::uint32_t v : frontier) {
      for (std::uint32_t w : c.graph.neighbors(v)) {
        if (dist[w] != -1) continue;
        if (c.dropped.count(edge_key(v, w))) continue;
        dist[w] = d;
        next.push_back(w);
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

FeatureVector oracle_vector(const RandomCase& c, std::uint32_t u,
                            const FeatureOptions& opts, const FeatureLayout& layout) {
  const SocialGraph& g = c.graph;
  FeatureVector out(layout.dim(), 0.0);
  const std::vector<int> dist = oracle_distances(c, u);

  for (int k = 1; k <= layout.max_distance; ++k) {
    double age_sum = 0.0;
    std::size_t age_count = 0;
    for (std::uint32_t w = 0; w < g.num_users(); ++w) {
      if (dist[w] != k) continue;
      out[layout.index_nk(k)] += 1.0;
      if (!c.visible[w]) continue;
      const Profile& p = g.profile(w);
      if (p.birth_year) {
        age_sum += opts.reference_year - *p.birth_year;
        ++age_count;
      }
      out[layout.index_gk(k, p.gender)] += 1.0;
      if (p.relationship) out[layout.index_rk(k, *p.relationship)] += 1.0;
      for (int i = 0; i < kNumInterests; ++i) {
        if (p.interests.contains(static_cast<Interest>(i))) {
          out[layout.index_ik(k, static_cast<Interest>(i))] += 1.0;
        }
      }
      if (auto cls = g.node_class(w)) out[layout.index_xk(k, *cls)] += 1.0;
    }
    if (age_count > 0) out[layout.index_ak(k)] = age_sum / age_count;
  }

  for (std::uint32_t v = 0; v < g.num_users(); ++v) {
    if (dist[v] != 1 || !c.visible[v]) continue;
    const auto cls = g.node_class(v);
    if (!cls) continue;
    std::size_t common = 0;
    for (std::uint32_t w = 0; w < g.num_users(); ++w) {
      const bool uw = std::binary_search(g.neighbors(u).begin(), g.neighbors(u).end(), w);
      const bool vw = std::binary_search(g.neighbors(v).begin(), g.neighbors(v).end(), w);
      if (uw && vw && !c.dropped.count(edge_key(u, w)) && !c.dropped.count(edge_key(v, w))) {
        ++common;
      }
    }
    out[layout.index_xw(*cls)] +=
        static_cast<double>(common) + (opts.xw_count_link ? 1.0 : 0.0);
  }
  return out;
}

TEST(FeatureOracle, TwoHundredRandomGraphsMatchExactly) {
  BfsScratch scratch;
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    const RandomCase c = make_case(derive_seed(0xFEA7, trial));
    const VisibilityMask mask = case_mask(c);
    const FeatureLayout layout{false, c.max_distance};
    FeatureOptions opts;
    opts.xw_count_link = (trial % 2 == 1);

    const std::vector<int> dist = oracle_distances(c, 0);
    const auto layers = exact_distance_sets(c.graph, 0, mask);
    ASSERT_EQ(layers.size(), static_cast<std::size_t>(c.max_distance));
    for (int k = 1; k <= c.max_distance; ++k) {
      std::vector<std::uint32_t> expected;
      for (std::uint32_t w = 0; w < c.graph.num_users(); ++w) {
        if (dist[w] == k) expected.push_back(w);
      }
      ASSERT_EQ(layers[static_cast<std::size_t>(k - 1)], expected)
          << "trial " << trial << " layer " << k;
    }

    for (std::uint32_t u = 0; u < c.graph.num_users(); ++u) {
      FeatureVector got;
      build_vector_into(c.graph, u, mask, opts, layout, scratch, got);
      const FeatureVector want = oracle_vector(c, u, opts, layout);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_DOUBLE_EQ(got[i], want[i])
            << "trial " << trial << " node " << u << " component " << i;
      }
    }
  }
}

TEST(FeaturesCsv, HeaderAndRows) {
  const FeatureLayout layout{false, 1};
  const std::string path = ::testing::TempDir() + "/features.csv";
  write_features_csv(path, layout, {7, 9},
                     {FeatureVector(layout.dim(), 0.0), FeatureVector(layout.dim(), 1.0)});
  std::ifstream f(path);
  std::string header, row1, row2;
  std::getline(f, header);
  std::getline(f, row1);
  std::getline(f, row2);
  EXPECT_EQ(header.substr(0, 12), "user_id,n_1,");
  EXPECT_EQ(row1.substr(0, 2), "7,");
  EXPECT_EQ(row2.substr(0, 2), "9,");

  EXPECT_THROW(write_features_csv(path, layout, {1}, {FeatureVector(3, 0.0)}),
               AuditError);
}

}  // namespace
}  // namespace shadowaudit
