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
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "shadowaudit/error.hpp"

namespace shadowaudit {

enum class Gender : std::uint8_t { Male, Female, Unspecified };

enum class Relationship : std::uint8_t {
  Single,
  Married,
  InARelationship,
  DomesticPartners,
  ItsComplicated,
};

/// The ten interest values a profile may declare.
enum class Interest : std::uint8_t {
  Friends,
  ActivityPartners,
  JustLookingAround,
  Fans,
  DatingWomen,
  RelationshipWithWomen,
  DatingMen,
  RelationshipWithMen,
  DatingMenAndWomen,
  RelationshipWithMenAndWomen,
};

inline constexpr int kNumInterests = 10;

/// Orientation classes, in canonical order. The first two (FF, FM) declare
/// no romantic interest; the remaining six are the "disclosing" classes.
enum class OrientationClass : std::uint8_t { FF, FM, HeF, HoM, HoF, HeM, BiF, BiM };

inline constexpr int kNumClasses = 8;

inline constexpr std::array<OrientationClass, kNumClasses> kAllClasses = {
    OrientationClass::FF,  OrientationClass::FM,  OrientationClass::HeF,
    OrientationClass::HoM, OrientationClass::HoF, OrientationClass::HeM,
    OrientationClass::BiF, OrientationClass::BiM};

/// Whether the class carries a declared romantic interest.
inline bool is_disclosing(OrientationClass c) {
  return c != OrientationClass::FF && c != OrientationClass::FM;
}

/// Set of Interest values; bitmask-backed, value semantics.
class InterestSet {
 public:
  constexpr InterestSet() = default;
  constexpr InterestSet(std::initializer_list<Interest> items) {
    for (Interest i : items) add(i);
  }

  constexpr void add(Interest i) { bits_ |= mask(i); }
  constexpr bool contains(Interest i) const { return (bits_ & mask(i)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    int n = 0;
    for (std::uint16_t b = bits_; b; b &= b - 1) ++n;
    return n;
  }
  constexpr std::uint16_t bits() const { return bits_; }

  friend constexpr bool operator==(InterestSet a, InterestSet b) = default;

 private:
  static constexpr std::uint16_t mask(Interest i) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(i));
  }
  std::uint16_t bits_ = 0;
};

struct Profile {
  std::uint32_t user_id = 0;                // doubles as join-order rank
  std::optional<int> birth_year;
  Gender gender = Gender::Unspecified;
  std::optional<Relationship> relationship;
  InterestSet interests;
};

// ---------------------------------------------------------------------------
// String forms (canonical on-disk spellings).

inline const char* to_string(Gender g) {
  switch (g) {
    case Gender::Male: return "M";
    case Gender::Female: return "F";
    case Gender::Unspecified: return "U";
  }
  return "U";
}

inline Gender parse_gender(std::string_view s) {
  if (s == "M") return Gender::Male;
  if (s == "F") return Gender::Female;
  if (s == "U") return Gender::Unspecified;
  fail(ErrorCode::ParseError, "unknown gender: '" + std::string(s) + "'");
}

inline const char* to_string(Relationship r) {
  switch (r) {
    case Relationship::Single: return "Single";
    case Relationship::Married: return "Married";
    case Relationship::InARelationship: return "In a Relationship";
    case Relationship::DomesticPartners: return "Domestic Partners";
    case Relationship::ItsComplicated: return "It's Complicated";
  }
  return "";
}

inline Relationship parse_relationship(std::string_view s) {
  if (s == "Single") return Relationship::Single;
  if (s == "Married") return Relationship::Married;
  if (s == "In a Relationship") return Relationship::InARelationship;
  if (s == "Domestic Partners") return Relationship::DomesticPartners;
  if (s == "It's Complicated") return Relationship::ItsComplicated;
  fail(ErrorCode::ParseError, "unknown relationship: '" + std::string(s) + "'");
}

inline const char* to_string(Interest i) {
  switch (i) {
    case Interest::Friends: return "Friends";
    case Interest::ActivityPartners: return "Activity Partners";
    case Interest::JustLookingAround: return "Just looking around";
    case Interest::Fans: return "Fans";
    case Interest::DatingWomen: return "Dating Women";
    case Interest::RelationshipWithWomen: return "Relationship with Women";
    case Interest::DatingMen: return "Dating Men";
    case Interest::RelationshipWithMen: return "Relationship with Men";
    case Interest::DatingMenAndWomen: return "Dating Men and Women";
    case Interest::RelationshipWithMenAndWomen: return "Relationship with Men and Women";
  }
  return "";
}

inline Interest parse_interest(std::string_view s) {
  for (int k = 0; k < kNumInterests; ++k) {
    Interest i = static_cast<Interest>(k);
    if (s == to_string(i)) return i;
  }
  fail(ErrorCode::ParseError, "unknown interest: '" + std::string(s) + "'");
}

inline const char* to_string(OrientationClass c) {
  switch (c) {
    case OrientationClass::FF: return "FF";
    case OrientationClass::FM: return "FM";
    case OrientationClass::HeF: return "HeF";
    case OrientationClass::HoM: return "HoM";
    case OrientationClass::HoF: return "HoF";
    case OrientationClass::HeM: return "HeM";
    case OrientationClass::BiF: return "BiF";
    case OrientationClass::BiM: return "BiM";
  }
  return "";
}

inline OrientationClass parse_class(std::string_view s) {
  for (OrientationClass c : kAllClasses) {
    if (s == to_string(c)) return c;
  }
  fail(ErrorCode::ParseError, "unknown orientation class: '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Class derivation.

inline bool interest_toward_men(InterestSet s) {
  return s.contains(Interest::DatingMen) || s.contains(Interest::RelationshipWithMen) ||
         s.contains(Interest::DatingMenAndWomen) ||
         s.contains(Interest::RelationshipWithMenAndWomen);
}

inline bool interest_toward_women(InterestSet s) {
  return s.contains(Interest::DatingWomen) || s.contains(Interest::RelationshipWithWomen) ||
         s.contains(Interest::DatingMenAndWomen) ||
         s.contains(Interest::RelationshipWithMenAndWomen);
}

/// Maps (gender, romantic interests) to the eight-row truth table.
/// Unspecified gender has no class.
inline OrientationClass derive_class(Gender gender, InterestSet interests) {
  if (gender == Gender::Unspecified) {
    fail(ErrorCode::UnspecifiedGender, "cannot derive orientation class without gender");
  }
  const bool m = interest_toward_men(interests);
  const bool w = interest_toward_women(interests);
  if (gender == Gender::Female) {
    if (!m && !w) return OrientationClass::FF;
    if (m && !w) return OrientationClass::HeF;
    if (!m && w) return OrientationClass::HoF;
    return OrientationClass::BiF;
  }
  if (!m && !w) return OrientationClass::FM;
  if (m && !w) return OrientationClass::HoM;
  if (!m && w) return OrientationClass::HeM;
  return OrientationClass::BiM;
}

inline std::optional<OrientationClass> try_derive_class(const Profile& p) {
  if (p.gender == Gender::Unspecified) return std::nullopt;
  return derive_class(p.gender, p.interests);
}

/// Inverse of derive_class: the canonical (gender, interests) pair whose
/// derived class is `c`. Used when synthesizing profiles from target classes.
inline std::pair<Gender, InterestSet> canonical_profile_fields(OrientationClass c) {
  switch (c) {
    case OrientationClass::FF: return {Gender::Female, {}};
    case OrientationClass::FM: return {Gender::Male, {}};
    case OrientationClass::HeF: return {Gender::Female, {Interest::DatingMen}};
    case OrientationClass::HoM: return {Gender::Male, {Interest::DatingMen}};
    case OrientationClass::HoF: return {Gender::Female, {Interest::DatingWomen}};
    case OrientationClass::HeM: return {Gender::Male, {Interest::DatingWomen}};
    case OrientationClass::BiF: return {Gender::Female, {Interest::DatingMenAndWomen}};
    case OrientationClass::BiM: return {Gender::Male, {Interest::DatingMenAndWomen}};
  }
  fail(ErrorCode::InvalidConfig, "invalid orientation class value");
}

/// Published base rates of the eight classes, in kAllClasses order.
inline constexpr std::array<double, kNumClasses> kFriendsterProportions = {
    0.282, 0.264, 0.093, 0.019, 0.010, 0.199, 0.068, 0.065};

}  // namespace shadowaudit
