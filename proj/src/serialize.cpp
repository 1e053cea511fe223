// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Model file: {"version":1,"manifest":{...},"stages":[...],"metadata":{...}}.
// Split and stage thresholds of +/-infinity are written as the strings "inf" / "-inf".
#include <cmath>
#include <cstdio>
#include <limits>

#include "compact/cascade.hpp"
#include "compact/errors.hpp"

namespace compact {

namespace {

constexpr int kModelVersion = 1;

nlohmann::json split_threshold_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

double split_threshold_from(const nlohmann::json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw SchemaError(path, "expected a number, \"inf\" or \"-inf\"");
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing field");
  return *it;
}

double number(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

std::string json_digest(const nlohmann::json& value) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : value.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json cascade_to_json(const Cascade& cascade) {
  nlohmann::json stages = nlohmann::json::array();
  for (const Stage& s : cascade.stages()) {
    if (s.is_external()) {
      stages.push_back({{"kind", "external"}, {"alpha", s.alpha}});
      continue;
    }
    const Tree& t = s.tree();
    nlohmann::json nodes = nlohmann::json::array();
    for (const Split& sp : t.splits()) {
      nodes.push_back({{"feature", sp.feature}, {"threshold", split_threshold_json(sp.threshold)}});
    }
    nlohmann::json leaves = nlohmann::json::array();
    for (auto v : t.leaves()) leaves.push_back(static_cast<int>(v));
    stages.push_back({{"kind", "tree"},
                      {"depth", t.depth()},
                      {"nodes", nodes},
                      {"leaves", leaves},
                      {"alpha", s.alpha},
                      {"threshold", s.threshold ? split_threshold_json(*s.threshold) : nlohmann::json(nullptr)}});
  }
  const auto& md = cascade.metadata();
  return {{"version", kModelVersion},
          {"manifest", cascade.manifest().to_json()},
          {"stages", stages},
          {"metadata",
           {{"config_digest", md.config_digest},
            {"seed", md.seed},
            {"version", md.version},
            {"config", md.config}}}};
}

std::string serialize(const Cascade& cascade) { return cascade_to_json(cascade).dump() + "\n"; }

Cascade cascade_from_json(const nlohmann::json& doc) {
  const auto& version = field(doc, "version", "$");
  if (!version.is_number_integer() || version.get<int>() != kModelVersion) {
    throw SchemaError("version", "unsupported model version (expected " +
                                     std::to_string(kModelVersion) + ")");
  }
  auto manifest = std::make_shared<const FamilyManifest>(
      manifest_from_json(field(doc, "manifest", "$"), "manifest"));

  const auto& stages_json = field(doc, "stages", "$");
  if (!stages_json.is_array() || stages_json.empty()) {
    throw SchemaError("stages", "expected a non-empty array");
  }
  std::vector<Stage> stages;
  for (std::size_t k = 0; k < stages_json.size(); ++k) {
    const std::string path = "stages[" + std::to_string(k) + "]";
    const auto& sj = stages_json[k];
    const auto& kind = field(sj, "kind", path);
    if (!kind.is_string()) throw SchemaError(path + ".kind", "expected a string");
    Stage stage{ExternalStage{}, number(sj, "alpha", path), std::nullopt};
    if (kind == "external") {
    } else if (kind == "tree") {
      const auto& nodes = field(sj, "nodes", path);
      const auto& leaves = field(sj, "leaves", path);
      if (!nodes.is_array()) throw SchemaError(path + ".nodes", "expected an array");
      if (!leaves.is_array()) throw SchemaError(path + ".leaves", "expected an array");
      std::vector<Split> splits;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const std::string np = path + ".nodes[" + std::to_string(j) + "]";
        const auto& f = field(nodes[j], "feature", np);
        if (!f.is_number_unsigned()) throw SchemaError(np + ".feature", "expected a feature id");
        const auto fid = f.get<std::uint64_t>();
        if (fid >= manifest->total_features()) throw SchemaError(np + ".feature", "unknown feature id");
        splits.push_back({static_cast<std::uint32_t>(fid),
                          split_threshold_from(field(nodes[j], "threshold", np), np + ".threshold")});
      }
      std::vector<std::int8_t> leaf_values;
      for (std::size_t j = 0; j < leaves.size(); ++j) {
        const auto& v = leaves[j];
        if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) {
          throw SchemaError(path + ".leaves[" + std::to_string(j) + "]", "expected -1 or 1");
        }
        leaf_values.push_back(static_cast<std::int8_t>(v.get<int>()));
      }
      try {
        stage.learner = Tree(std::move(splits), std::move(leaf_values));
      } catch (const InvalidInput& e) {
        throw SchemaError(path + ".nodes", e.what());
      }
      if (auto d = sj.find("depth"); d != sj.end() &&
                                     (!d->is_number_integer() || d->get<int>() != stage.tree().depth())) {
        throw SchemaError(path + ".depth", "does not match the node layout");
      }
      const auto& thr = field(sj, "threshold", path);
      if (!thr.is_null()) stage.threshold = split_threshold_from(thr, path + ".threshold");
    } else {
      throw SchemaError(path + ".kind", "expected \"tree\" or \"external\"");
    }
    stages.push_back(std::move(stage));
  }

  CascadeMetadata md;
  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("metadata", "expected an object");
    if (auto d = it->find("config_digest"); d != it->end() && d->is_string()) md.config_digest = *d;
    if (auto s = it->find("seed"); s != it->end()) {
      if (!s->is_number_unsigned()) throw SchemaError("metadata.seed", "expected a non-negative integer");
      md.seed = s->get<std::uint64_t>();
    }
    if (auto v = it->find("version"); v != it->end() && v->is_string()) md.version = *v;
    if (auto c = it->find("config"); c != it->end()) md.config = *c;
  }
  try {
    return Cascade(std::move(stages), std::move(manifest), std::move(md));
  } catch (const InvalidInput& e) {
    throw SchemaError("stages", e.what());
  }
}

Cascade deserialize(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  return cascade_from_json(doc);
}

}  // namespace compact
