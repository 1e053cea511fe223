// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "compact/csv.hpp"
#include "compact/errors.hpp"
#include "compact/harness.hpp"

namespace compact::harness {

namespace fs = std::filesystem;

namespace {

template <class T>
void read_key(const nlohmann::json& obj, const char* key, const std::string& where, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    it->get_to(out);
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(where + "." + key, "wrong type");
  }
}

void read_path(const nlohmann::json& obj, const char* key, std::optional<fs::path>& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  if (!it->is_string()) throw SchemaError(key, "expected a path string");
  out = it->get<std::string>();
}

GeneratorConfig generator_from_json(const nlohmann::json& g, RunConfig& rc) {
  if (!g.is_object()) throw SchemaError("generator", "expected an object");
  GeneratorConfig cfg = default_cost_ladder();
  if (const auto it = g.find("families"); it != g.end()) {
    if (!it->is_array()) throw SchemaError("generator.families", "expected an array");
    cfg.families.clear();
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& f = (*it)[k];
      const std::string where = "generator.families[" + std::to_string(k) + "]";
      if (!f.is_object() || !f.contains("name")) throw SchemaError(where, "expected an object with a name");
      SynthFamily fam;
      read_key(f, "name", where, fam.name);
      read_key(f, "features", where, fam.features);
      read_key(f, "unit_cost", where, fam.unit_cost);
      read_key(f, "disc", where, fam.disc);
      read_key(f, "correlation", where, fam.correlation);
      if (const auto t = f.find("trigger_group"); t != f.end() && !t->is_null()) {
        if (!t->is_string()) throw SchemaError(where + ".trigger_group", "expected a string");
        fam.trigger_group = t->get<std::string>();
      }
      cfg.families.push_back(std::move(fam));
    }
  }
  if (const auto it = g.find("trigger_groups"); it != g.end()) {
    if (!it->is_array()) throw SchemaError("generator.trigger_groups", "expected an array");
    cfg.trigger_groups.clear();
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "generator.trigger_groups[" + std::to_string(k) + "]";
      TriggerGroup tg;
      read_key((*it)[k], "id", where, tg.id);
      read_key((*it)[k], "trigger_cost", where, tg.trigger_cost);
      cfg.trigger_groups.push_back(std::move(tg));
    }
  }
  read_key(g, "positives", "generator", cfg.positives);
  read_key(g, "negatives", "generator", cfg.negatives);
  read_key(g, "delta", "generator", cfg.delta);
  read_key(g, "shared_correlation", "generator", cfg.shared_correlation);
  read_key(g, "test_positives", "generator", rc.test_positives);
  read_key(g, "test_negatives", "generator", rc.test_negatives);
  read_key(g, "pool_negatives", "generator", rc.pool_negatives);
  return cfg;
}

nlohmann::json generator_to_json(const GeneratorConfig& cfg) {
  nlohmann::json fams = nlohmann::json::array();
  for (const auto& f : cfg.families) {
    nlohmann::json j{{"name", f.name},     {"features", f.features},       {"unit_cost", f.unit_cost},
                     {"disc", f.disc},     {"correlation", f.correlation}, {"trigger_group", nullptr}};
    if (f.trigger_group) j["trigger_group"] = *f.trigger_group;
    fams.push_back(std::move(j));
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : cfg.trigger_groups) groups.push_back({{"id", g.id}, {"trigger_cost", g.trigger_cost}});
  return {{"families", fams},
          {"trigger_groups", groups},
          {"positives", cfg.positives},
          {"negatives", cfg.negatives},
          {"delta", cfg.delta},
          {"shared_correlation", cfg.shared_correlation}};
}

}  // namespace

void RunConfig::validate_paths() const {
  std::set<fs::path> seen;
  for (const auto* p : {&data, &test, &manifest, &pool, &model, &scores, &out, &log}) {
    if (!*p) continue;
    const fs::path norm = fs::absolute(**p).lexically_normal();
    if (!seen.insert(norm).second) throw ConfigError("path used twice: " + (*p)->string());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  auto put = [&](const char* key, const std::optional<fs::path>& p) {
    if (p) j[key] = p->string();
  };
  put("data", data);
  put("test", test);
  put("manifest", manifest);
  put("pool", pool);
  put("model", model);
  put("scores", scores);
  put("out", out);
  put("log", log);
  j["generator"] = generator_to_json(generator);
  j["generator"]["test_positives"] = test_positives;
  j["generator"]["test_negatives"] = test_negatives;
  j["generator"]["pool_negatives"] = pool_negatives;
  j["train"] = train.to_json();
  j["eta_grid"] = eta_grid;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("config", "expected a JSON object");
  RunConfig rc;
  read_path(doc, "data", rc.data);
  read_path(doc, "test", rc.test);
  read_path(doc, "manifest", rc.manifest);
  read_path(doc, "pool", rc.pool);
  read_path(doc, "model", rc.model);
  read_path(doc, "scores", rc.scores);
  read_path(doc, "out", rc.out);
  read_path(doc, "log", rc.log);
  if (const auto it = doc.find("generator"); it != doc.end()) rc.generator = generator_from_json(*it, rc);
  if (const auto it = doc.find("train"); it != doc.end()) rc.train = TrainConfig::from_json(*it);
  read_key(doc, "eta_grid", "config", rc.eta_grid);
  read_key(doc, "seed", "config", rc.train.seed);
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string(), e.what());
  }
  return run_config_from_json(doc);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot replace " + path.string());
  }
}

ExternalScores parse_scores_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0] != csv::Row{"id", "score"}) throw SchemaError("line 1", "expected header id,score");
  ExternalScores scores;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string where = "line " + std::to_string(r + 1);
    if (rows[r].size() != 2) throw SchemaError(where, "expected 2 fields");
    double v;
    try {
      v = csv::parse_double(rows[r][1]);
    } catch (const std::exception&) {
      throw SchemaError(where, "score is not a number");
    }
    if (!std::isfinite(v)) throw SchemaError(where, "score is not finite");
    if (!scores.emplace(rows[r][0], v).second) throw SchemaError(where, "duplicate id " + rows[r][0]);
  }
  return scores;
}

std::string scores_to_csv(const Dataset& data, const std::vector<double>& scores) {
  if (scores.size() != data.size()) throw InvalidInput("one score per example expected");
  std::string out = "id,score\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += csv::format_row({data[i].id, csv::format_double(scores[i])}) + "\n";
  }
  return out;
}

}  // namespace compact::harness
