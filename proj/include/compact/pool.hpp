// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature families of different evaluation cost, and the cost model used to
// meter weak learners. A family may belong to a trigger group: the first use
// of any feature of the group on an example pays the group's one-time trigger
// cost (a block computation, e.g. a CNN forward pass), later uses pay only
// the unit cost.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace compact {

class Tree;

struct FeatureFamily {
  std::string name;
  std::size_t start = 0;  ///< first global feature id
  std::size_t end = 0;    ///< one past the last
  double unit_cost = 1.0;
  std::optional<std::string> trigger_group;
  double disc = 0.0;  ///< generator-only discriminativeness in [0, 1]

  std::size_t size() const { return end - start; }
};

struct TriggerGroup {
  std::string id;
  double trigger_cost = 0.0;
};

/// Set of trigger groups already paid for on one example during one cascade
/// evaluation. Groups are only ever added.
class TriggerState {
 public:
  bool fired(std::size_t group) const { return (bits_ >> group) & 1U; }
  void fire(std::size_t group) { bits_ |= std::uint64_t{1} << group; }
  bool empty() const { return bits_ == 0; }
  std::uint64_t bits() const { return bits_; }
  friend bool operator==(const TriggerState&, const TriggerState&) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct ManifestOptions {
  /// Require trigger_cost >= the largest unit cost of the group's members.
  bool check_trigger_dominance = true;
};

class FamilyManifest {
 public:
  static constexpr std::size_t kMaxTriggerGroups = 64;

  /// Validates and indexes. Throws SchemaError naming the offending field.
  FamilyManifest(std::vector<FeatureFamily> families, std::vector<TriggerGroup> groups,
                 ManifestOptions options = {});

  const std::vector<FeatureFamily>& families() const { return families_; }
  const std::vector<TriggerGroup>& trigger_groups() const { return groups_; }
  std::size_t total_features() const { return feature_family_.size(); }

  /// Throws InvalidInput for an unknown feature id.
  std::size_t family_of(std::size_t feature) const;
  double unit_cost(std::size_t feature) const { return families_[family_of(feature)].unit_cost; }
  /// Index into trigger_groups() for a family, if gated.
  std::optional<std::size_t> trigger_of_family(std::size_t family) const {
    return family_trigger_[family];
  }
  std::optional<std::size_t> family_index(std::string_view name) const;

  nlohmann::json to_json() const;
  friend bool operator==(const FamilyManifest& a, const FamilyManifest& b) {
    return a.to_json() == b.to_json();
  }

 private:
  std::vector<FeatureFamily> families_;
  std::vector<TriggerGroup> groups_;
  std::vector<std::uint32_t> feature_family_;
  std::vector<std::optional<std::size_t>> family_trigger_;
};

/// Parses the manifest JSON document (see README for the schema).
FamilyManifest load_manifest(std::string_view document, ManifestOptions options = {});
/// Same, from an already parsed value; `path` prefixes error locations.
FamilyManifest manifest_from_json(const nlohmann::json& doc, const std::string& path = "",
                                  ManifestOptions options = {});

/// Sum of unit costs over the learner's distinct features.
double learner_base_cost(const Tree& learner, const FamilyManifest& manifest);

struct ChargedCost {
  double cost;
  TriggerState state;
};

/// Base cost plus the trigger cost of every group the learner touches that
/// has not fired yet in `state`; the returned state has those groups fired.
ChargedCost learner_cost_for_example(const Tree& learner, const FamilyManifest& manifest,
                                     TriggerState state);

/// Trigger groups touched by a learner, as a state with those bits set.
TriggerState learner_trigger_groups(const Tree& learner, const FamilyManifest& manifest);

}  // namespace compact
