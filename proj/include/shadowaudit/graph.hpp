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
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shadowaudit/error.hpp"
#include "shadowaudit/profile.hpp"

namespace shadowaudit {

/// Undirected social graph over profiles. Immutable once built; all queries
/// are safe for shared concurrent reads.
///
/// Node index = join-order rank: profiles are kept sorted by user_id
/// ascending, and ids encode the order in which users joined. Adjacency and
/// edge storage use node indices; user ids appear only at the I/O boundary.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// Validates and builds. `edge_ids` are user_id pairs.
  /// Throws DuplicateUser, SelfLoop, DuplicateEdge, DanglingEdge.
  static SocialGraph build(std::vector<Profile> profiles,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_ids) {
    SocialGraph g;
    std::sort(profiles.begin(), profiles.end(),
              [](const Profile& a, const Profile& b) { return a.user_id < b.user_id; });
    for (std::size_t i = 1; i < profiles.size(); ++i) {
      if (profiles[i].user_id == profiles[i - 1].user_id) {
        fail(ErrorCode::DuplicateUser,
             "duplicate user_id " + std::to_string(profiles[i].user_id));
      }
    }
    g.profiles_ = std::move(profiles);

    g.class_of_.resize(g.profiles_.size());
    for (std::size_t i = 0; i < g.profiles_.size(); ++i) {
      auto c = try_derive_class(g.profiles_[i]);
      g.class_of_[i] = c ? static_cast<std::int8_t>(*c) : std::int8_t{-1};
    }

    g.edges_.reserve(edge_ids.size());
    for (const auto& [ua, ub] : edge_ids) {
      if (ua == ub) {
        fail(ErrorCode::SelfLoop, "self-loop on user_id " + std::to_string(ua));
      }
      std::uint32_t a = g.index_of_or_fail(ua, ErrorCode::DanglingEdge);
      std::uint32_t b = g.index_of_or_fail(ub, ErrorCode::DanglingEdge);
      if (a > b) std::swap(a, b);
      g.edges_.emplace_back(a, b);
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    for (std::size_t i = 1; i < g.edges_.size(); ++i) {
      if (g.edges_[i] == g.edges_[i - 1]) {
        fail(ErrorCode::DuplicateEdge,
             "duplicate edge " + std::to_string(g.profiles_[g.edges_[i].first].user_id) + "-" +
                 std::to_string(g.profiles_[g.edges_[i].second].user_id));
      }
    }

    g.build_adjacency();
    return g;
  }

  std::size_t num_users() const { return profiles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Profile& profile(std::uint32_t index) const { return profiles_[index]; }
  const std::vector<Profile>& profiles() const { return profiles_; }

  /// Sorted canonical edge list as (index, index) pairs with first < second.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const { return edges_; }

  /// Neighbor indices of `index`, ascending, each exactly once.
  std::span<const std::uint32_t> neighbors(std::uint32_t index) const {
    return {adj_.data() + offsets_[index], adj_.data() + offsets_[index + 1]};
  }

  std::size_t degree(std::uint32_t index) const {
    return offsets_[index + 1] - offsets_[index];
  }

  double mean_degree() const {
    if (profiles_.empty()) return 0.0;
    return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(profiles_.size());
  }

  /// Orientation class of the node, or nullopt for Unspecified gender.
  std::optional<OrientationClass> node_class(std::uint32_t index) const {
    if (class_of_[index] < 0) return std::nullopt;
    return static_cast<OrientationClass>(class_of_[index]);
  }

  /// Join-order rank for a user id; throws UnknownUser if absent.
  std::uint32_t index_of(std::uint32_t user_id) const {
    return index_of_or_fail(user_id, ErrorCode::UnknownUser);
  }

  bool contains_user(std::uint32_t user_id) const {
    auto it = std::lower_bound(profiles_.begin(), profiles_.end(), user_id,
                               [](const Profile& p, std::uint32_t id) { return p.user_id < id; });
    return it != profiles_.end() && it->user_id == user_id;
  }

 private:
  std::uint32_t index_of_or_fail(std::uint32_t user_id, ErrorCode code) const {
    auto it = std::lower_bound(profiles_.begin(), profiles_.end(), user_id,
                               [](const Profile& p, std::uint32_t id) { return p.user_id < id; });
    if (it == profiles_.end() || it->user_id != user_id) {
      fail(code, "unknown user_id " + std::to_string(user_id));
    }
    return static_cast<std::uint32_t>(it - profiles_.begin());
  }

  void build_adjacency() {
    offsets_.assign(profiles_.size() + 1, 0);
    for (const auto& [a, b] : edges_) {
      ++offsets_[a + 1];
      ++offsets_[b + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adj_.resize(2 * edges_.size());
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
      adj_[cursor[a]++] = b;
      adj_[cursor[b]++] = a;
    }
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
    }
  }

  std::vector<Profile> profiles_;                              // sorted by user_id
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_; // index pairs, sorted
  std::vector<std::uint32_t> offsets_;                         // CSR offsets
  std::vector<std::uint32_t> adj_;                             // CSR neighbor indices
  std::vector<std::int8_t> class_of_;                          // -1 when underivable
};

// ---------------------------------------------------------------------------
// Canonical TSV formats.

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::uint64_t parse_uint(std::string_view field, const std::string& where) {
  std::uint64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    fail(ErrorCode::ParseError, where + ": expected non-negative integer, got '" +
                                    std::string(field) + "'");
  }
  return value;
}

inline int parse_int(std::string_view field, const std::string& where) {
  int value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    fail(ErrorCode::ParseError,
         where + ": expected integer, got '" + std::string(field) + "'");
  }
  return value;
}

inline InterestSet parse_interest_list(std::string_view field, const std::string& where) {
  InterestSet set;
  if (field.empty()) return set;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = field.find(',', start);
    std::string_view item =
        pos == std::string_view::npos ? field.substr(start) : field.substr(start, pos - start);
    try {
      set.add(parse_interest(item));
    } catch (const AuditError& e) {
      fail(ErrorCode::ParseError, where + ": " + e.what());
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return set;
}

inline void check_line_ending(std::string& line, const std::string& where) {
  if (!line.empty() && line.back() == '\r') {
    fail(ErrorCode::ParseError, where + ": carriage return found; lines must end with LF");
  }
}

}  // namespace detail

inline constexpr std::string_view kProfilesHeader =
    "user_id\tbirth_year\tgender\trelationship\tinterests";

/// Reads the two canonical TSV files and builds a validated graph.
inline SocialGraph load_graph(const std::string& profiles_path, const std::string& edges_path) {
  std::ifstream pf(profiles_path, std::ios::binary);
  if (!pf) fail(ErrorCode::IoError, "cannot open profiles file: " + profiles_path);

  std::vector<Profile> profiles;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(pf, line)) {
    fail(ErrorCode::ParseError, profiles_path + ":1: missing header row");
  }
  ++lineno;
  detail::check_line_ending(line, profiles_path + ":1");
  if (line != kProfilesHeader) {
    fail(ErrorCode::ParseError, profiles_path + ":1: bad header row");
  }

  while (std::getline(pf, line)) {
    ++lineno;
    const std::string where = profiles_path + ":" + std::to_string(lineno);
    detail::check_line_ending(line, where);
    if (line.empty() && pf.eof()) break;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 5) {
      fail(ErrorCode::ParseError,
           where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    Profile p;
    std::uint64_t id = detail::parse_uint(fields[0], where + " (user_id)");
    if (id > UINT32_MAX) fail(ErrorCode::ParseError, where + ": user_id out of range");
    p.user_id = static_cast<std::uint32_t>(id);
    if (!fields[1].empty()) p.birth_year = detail::parse_int(fields[1], where + " (birth_year)");
    try {
      p.gender = parse_gender(fields[2]);
      if (!fields[3].empty()) p.relationship = parse_relationship(fields[3]);
    } catch (const AuditError& e) {
      fail(ErrorCode::ParseError, where + ": " + e.what());
    }
    p.interests = detail::parse_interest_list(fields[4], where + " (interests)");
    profiles.push_back(p);
  }

  std::ifstream ef(edges_path, std::ios::binary);
  if (!ef) fail(ErrorCode::IoError, "cannot open edges file: " + edges_path);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  lineno = 0;
  while (std::getline(ef, line)) {
    ++lineno;
    const std::string where = edges_path + ":" + std::to_string(lineno);
    detail::check_line_ending(line, where);
    if (line.empty() && ef.eof()) break;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 2) {
      fail(ErrorCode::ParseError,
           where + ": expected 2 fields, got " + std::to_string(fields.size()));
    }
    std::uint64_t u = detail::parse_uint(fields[0], where + " (u)");
    std::uint64_t v = detail::parse_uint(fields[1], where + " (v)");
    if (u > UINT32_MAX || v > UINT32_MAX) {
      fail(ErrorCode::ParseError, where + ": user_id out of range");
    }
    edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }

  return SocialGraph::build(std::move(profiles), edges);
}

/// Writes the canonical TSV files byte-stably: profiles sorted by id,
/// edges sorted with smaller id first, LF endings, trailing newline.
inline void save_graph(const SocialGraph& g, const std::string& profiles_path,
                       const std::string& edges_path) {
  std::ostringstream ps;
  ps << kProfilesHeader << '\n';
  for (std::size_t i = 0; i < g.num_users(); ++i) {
    const Profile& p = g.profile(static_cast<std::uint32_t>(i));
    ps << p.user_id << '\t';
    if (p.birth_year) ps << *p.birth_year;
    ps << '\t' << to_string(p.gender) << '\t';
    if (p.relationship) ps << to_string(*p.relationship);
    ps << '\t';
    bool first = true;
    for (int k = 0; k < kNumInterests; ++k) {
      Interest interest = static_cast<Interest>(k);
      if (p.interests.contains(interest)) {
        if (!first) ps << ',';
        ps << to_string(interest);
        first = false;
      }
    }
    ps << '\n';
  }

  std::ostringstream es;
  for (const auto& [a, b] : g.edges()) {
    es << g.profile(a).user_id << '\t' << g.profile(b).user_id << '\n';
  }

  std::ofstream pf(profiles_path, std::ios::binary | std::ios::trunc);
  if (!pf) fail(ErrorCode::IoError, "cannot open profiles file for write: " + profiles_path);
  pf << ps.str();
  if (!pf) fail(ErrorCode::IoError, "write failed: " + profiles_path);

  std::ofstream ef(edges_path, std::ios::binary | std::ios::trunc);
  if (!ef) fail(ErrorCode::IoError, "cannot open edges file for write: " + edges_path);
  ef << es.str();
  if (!ef) fail(ErrorCode::IoError, "write failed: " + edges_path);
}

/// Fraction of edges whose endpoints share an orientation class.
/// Requires every endpoint to have a derivable class and |E| > 0.
inline double assortative_edge_fraction(const SocialGraph& g) {
  if (g.num_edges() == 0) fail(ErrorCode::EmptyGraph, "graph has no edges");
  std::size_t same = 0;
  for (const auto& [a, b] : g.edges()) {
    auto ca = g.node_class(a);
    auto cb = g.node_class(b);
    if (!ca || !cb) {
      fail(ErrorCode::UnspecifiedGender,
           "edge endpoint without derivable class: user_id " +
               std::to_string(g.profile(!ca ? a : b).user_id));
    }
    if (*ca == *cb) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

/// Per-class node counts in kAllClasses order, plus count of classless nodes.
inline std::pair<std::array<std::size_t, kNumClasses>, std::size_t> class_counts(
    const SocialGraph& g) {
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t unclassed = 0;
  for (std::size_t i = 0; i < g.num_users(); ++i) {
    auto c = g.node_class(static_cast<std::uint32_t>(i));
    if (c) {
      ++counts[static_cast<std::size_t>(*c)];
    } else {
      ++unclassed;
    }
  }
  return {counts, unclassed};
}

/// Subgraph induced by the first `count` nodes in join order. Node indices
/// in the result coincide with the parent's (the subset is a prefix).
inline SocialGraph induced_prefix(const SocialGraph& g, std::size_t count) {
  if (count > g.num_users()) {
    fail(ErrorCode::InvalidConfig, "prefix size exceeds node count");
  }
  std::vector<Profile> profiles;
  profiles.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    profiles.push_back(g.profile(static_cast<std::uint32_t>(i)));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_ids;
  for (const auto& [a, b] : g.edges()) {
    if (a < count && b < count) {
      edge_ids.emplace_back(g.profile(a).user_id, g.profile(b).user_id);
    }
  }
  return SocialGraph::build(std::move(profiles), edge_ids);
}

}  // namespace shadowaudit
