// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "compact/errors.hpp"
#include "compact/tree.hpp"

namespace compact {

FamilyManifest::FamilyManifest(std::vector<FeatureFamily> families,
                               std::vector<TriggerGroup> groups, ManifestOptions options)
    : families_(std::move(families)), groups_(std::move(groups)) {
  if (families_.empty()) throw SchemaError("families", "at least one family is required");
  if (groups_.size() > kMaxTriggerGroups) {
    throw SchemaError("trigger_groups", "at most 64 trigger groups are supported");
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const std::string where = "trigger_groups[" + std::to_string(g) + "]";
    if (groups_[g].id.empty()) throw SchemaError(where + ".id", "empty id");
    if (!(groups_[g].trigger_cost > 0.0) || !std::isfinite(groups_[g].trigger_cost)) {
      throw SchemaError(where + ".trigger_cost", "must be a positive finite number");
    }
    for (std::size_t h = 0; h < g; ++h) {
      if (groups_[h].id == groups_[g].id) throw SchemaError(where + ".id", "duplicate id");
    }
  }

  std::vector<std::size_t> order(families_.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t f = 0; f < families_.size(); ++f) {
    const auto& fam = families_[f];
    const std::string where = "families[" + std::to_string(f) + "]";
    if (fam.name.empty()) throw SchemaError(where + ".name", "empty name");
    for (std::size_t h = 0; h < f; ++h) {
      if (families_[h].name == fam.name) throw SchemaError(where + ".name", "duplicate name");
    }
    if (fam.end <= fam.start) throw SchemaError(where + ".end", "end must be greater than start");
    if (!(fam.unit_cost > 0.0) || !std::isfinite(fam.unit_cost)) {
      throw SchemaError(where + ".unit_cost", "must be a positive finite number");
    }
    if (!(fam.disc >= 0.0 && fam.disc <= 1.0)) throw SchemaError(where + ".disc", "must lie in [0, 1]");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return families_[a].start < families_[b].start; });
  std::size_t next = 0;
  for (std::size_t idx : order) {
    const auto& fam = families_[idx];
    const std::string where = "families[" + std::to_string(idx) + "]";
    if (fam.start < next) throw SchemaError(where + ".start", "feature range overlaps another family");
    if (fam.start > next) {
      throw SchemaError(where + ".start",
                        "gap in feature ranges: ids [" + std::to_string(next) + ", " +
                            std::to_string(fam.start) + ") belong to no family");
    }
    next = fam.end;
  }

  feature_family_.resize(next);
  family_trigger_.resize(families_.size());
  for (std::size_t f = 0; f < families_.size(); ++f) {
    std::fill(feature_family_.begin() + static_cast<std::ptrdiff_t>(families_[f].start),
              feature_family_.begin() + static_cast<std::ptrdiff_t>(families_[f].end),
              static_cast<std::uint32_t>(f));
    if (const auto& tg = families_[f].trigger_group) {
      auto it = std::find_if(groups_.begin(), groups_.end(),
                             [&](const TriggerGroup& g) { return g.id == *tg; });
      if (it == groups_.end()) {
        throw SchemaError("families[" + std::to_string(f) + "].trigger_group",
                          "unknown trigger group '" + *tg + "'");
      }
      const auto g = static_cast<std::size_t>(it - groups_.begin());
      family_trigger_[f] = g;
      if (options.check_trigger_dominance && it->trigger_cost < families_[f].unit_cost) {
        throw SchemaError("trigger_groups[" + std::to_string(g) + "].trigger_cost",
                          "smaller than the unit cost of member family '" + families_[f].name + "'");
      }
    }
  }
}

std::size_t FamilyManifest::family_of(std::size_t feature) const {
  if (feature >= feature_family_.size()) {
    throw InvalidInput("unknown feature id " + std::to_string(feature));
  }
  return feature_family_[feature];
}

std::optional<std::size_t> FamilyManifest::family_index(std::string_view name) const {
  for (std::size_t f = 0; f < families_.size(); ++f) {
    if (families_[f].name == name) return f;
  }
  return std::nullopt;
}

nlohmann::json FamilyManifest::to_json() const {
  nlohmann::json fams = nlohmann::json::array();
  for (const auto& f : families_) {
    fams.push_back({{"name", f.name},
                    {"start", f.start},
                    {"end", f.end},
                    {"unit_cost", f.unit_cost},
                    {"trigger_group", f.trigger_group ? nlohmann::json(*f.trigger_group) : nullptr},
                    {"disc", f.disc}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : groups_) groups.push_back({{"id", g.id}, {"trigger_cost", g.trigger_cost}});
  return {{"families", fams}, {"trigger_groups", groups}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing field");
  return *it;
}

double require_number(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::size_t require_index(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_unsigned()) throw SchemaError(path + "." + key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

FamilyManifest manifest_from_json(const nlohmann::json& doc, const std::string& path,
                                  ManifestOptions options) {
  const std::string root = path.empty() ? "" : path + ".";
  if (!doc.is_object()) throw SchemaError(path.empty() ? "$" : path, "expected an object");
  const auto& fams = require(doc, "families", path.empty() ? "$" : path);
  if (!fams.is_array()) throw SchemaError(root + "families", "expected an array");

  std::vector<FeatureFamily> families;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const std::string where = root + "families[" + std::to_string(i) + "]";
    const auto& f = fams[i];
    if (!f.is_object()) throw SchemaError(where, "expected an object");
    FeatureFamily fam;
    fam.name = require_string(f, "name", where);
    fam.start = require_index(f, "start", where);
    fam.end = require_index(f, "end", where);
    fam.unit_cost = require_number(f, "unit_cost", where);
    if (auto it = f.find("trigger_group"); it != f.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError(where + ".trigger_group", "expected a string or null");
      fam.trigger_group = it->get<std::string>();
    }
    if (auto it = f.find("disc"); it != f.end()) {
      if (!it->is_number()) throw SchemaError(where + ".disc", "expected a number");
      fam.disc = it->get<double>();
    }
    families.push_back(std::move(fam));
  }

  std::vector<TriggerGroup> groups;
  if (auto it = doc.find("trigger_groups"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError(root + "trigger_groups", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = root + "trigger_groups[" + std::to_string(i) + "]";
      const auto& g = (*it)[i];
      if (!g.is_object()) throw SchemaError(where, "expected an object");
      groups.push_back({require_string(g, "id", where), require_number(g, "trigger_cost", where)});
    }
  }

  try {
    return FamilyManifest(std::move(families), std::move(groups), options);
  } catch (const SchemaError& e) {
    if (root.empty()) throw;
    throw SchemaError(root + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

FamilyManifest load_manifest(std::string_view document, ManifestOptions options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  return manifest_from_json(doc, "", options);
}

double learner_base_cost(const Tree& learner, const FamilyManifest& manifest) {
  double total = 0.0;
  for (std::size_t f : learner.distinct_features()) total += manifest.unit_cost(f);
  return total;
}

TriggerState learner_trigger_groups(const Tree& learner, const FamilyManifest& manifest) {
  TriggerState touched;
  for (std::size_t f : learner.distinct_features()) {
    if (auto g = manifest.trigger_of_family(manifest.family_of(f))) touched.fire(*g);
  }
  return touched;
}

ChargedCost learner_cost_for_example(const Tree& learner, const FamilyManifest& manifest,
                                     TriggerState state) {
  double cost = learner_base_cost(learner, manifest);
  const TriggerState touched = learner_trigger_groups(learner, manifest);
  for (std::size_t g = 0; g < manifest.trigger_groups().size(); ++g) {
    if (touched.fired(g) && !state.fired(g)) {
      cost += manifest.trigger_groups()[g].trigger_cost;
      state.fire(g);
    }
  }
  return {cost, state};
}

}  // namespace compact
