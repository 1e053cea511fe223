// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <algorithm>
#include <chrono>
#include <iomanip>
#include <iostream>

#include "compact/csv.hpp"
#include "compact/errors.hpp"
#include "compact/harness.hpp"
#include "compact/rng.hpp"

namespace compact::harness {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const fs::path& require(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw UsageError(std::string("missing required option --") + flag);
  return *p;
}

std::shared_ptr<const FamilyManifest> load_manifest_file(const fs::path& path) {
  return std::make_shared<const FamilyManifest>(load_manifest(read_file(path)));
}

Dataset load_dataset(const fs::path& path, std::shared_ptr<const FamilyManifest> manifest) {
  try {
    return parse_dataset_csv(read_file(path), std::move(manifest));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ":" + e.path(), e.what());
  }
}

Cascade load_model(const fs::path& path) {
  try {
    return deserialize(read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ":" + e.path(), e.what());
  }
}

std::string fmt(double v) { return csv::format_double(v); }

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string manifest_text(const FamilyManifest& m) { return m.to_json().dump() + "\n"; }

}  // namespace

std::string train_log_csv(const std::vector<RoundLog>& log) {
  std::string out =
      "round,family,score,edge_term,complexity_term,base_cost,alpha,threshold,active,active_negatives,"
      "fast_path,risk_e,risk_c,lagrangian,train_error,bootstrap_added,bootstrap_shortfall\n";
  for (const auto& r : log) {
    out += csv::format_row({std::to_string(r.round), r.family, fmt(r.score), fmt(r.edge_term),
                            fmt(r.complexity_term), fmt(r.base_cost), fmt(r.alpha), opt_fmt(r.threshold),
                            std::to_string(r.active), std::to_string(r.active_negatives),
                            r.fast_path ? "1" : "0", fmt(r.risk_e), fmt(r.risk_c), fmt(r.lagrangian),
                            fmt(r.train_error),
                            r.bootstrap_added ? std::to_string(*r.bootstrap_added) : std::string(),
                            std::to_string(r.bootstrap_shortfall)});
    out += "\n";
  }
  return out;
}

std::string stage_configuration_csv(const Cascade& cascade) {
  const FamilyManifest& man = cascade.manifest();
  std::string out = "stage,family,base_cost,alpha,threshold\n";
  for (std::size_t k = 0; k < cascade.size(); ++k) {
    const Stage& s = cascade.stages()[k];
    std::string family = "external";
    double cost = 0.0;
    if (!s.is_external()) {
      family.clear();
      std::vector<std::size_t> fams;
      for (std::size_t f : s.tree().distinct_features()) fams.push_back(man.family_of(f));
      std::sort(fams.begin(), fams.end());
      fams.erase(std::unique(fams.begin(), fams.end()), fams.end());
      for (std::size_t f : fams) {
        if (!family.empty()) family += "|";
        family += man.families()[f].name;
      }
      cost = learner_base_cost(s.tree(), man);
    }
    out += csv::format_row({std::to_string(k), family, fmt(cost), fmt(s.alpha), opt_fmt(s.threshold)}) + "\n";
  }
  return out;
}

std::vector<std::optional<std::size_t>> first_use(const Cascade& cascade) {
  const FamilyManifest& man = cascade.manifest();
  std::vector<std::optional<std::size_t>> out(man.families().size());
  for (std::size_t k = 0; k < cascade.size(); ++k) {
    const Stage& s = cascade.stages()[k];
    if (s.is_external()) continue;
    for (std::size_t f : s.tree().distinct_features()) {
      auto& slot = out[man.family_of(f)];
      if (!slot) slot = k;
    }
  }
  return out;
}

std::string SweepReport::to_csv() const {
  csv::Row header{"eta", "train_error", "test_error", "negative_total_omega", "positive_total_omega"};
  for (const auto& f : families) header.push_back("first_use_" + f);
  header.insert(header.end(), {"seconds", "status"});
  std::string out = csv::format_row(header) + "\n";
  for (const auto& r : rows) {
    csv::Row row{fmt(r.eta), fmt(r.train_error), fmt(r.test_error), fmt(r.negative_omega), fmt(r.positive_omega)};
    for (std::size_t k = 0; k < families.size(); ++k) {
      row.push_back(k < r.first_use.size() && r.first_use[k] ? std::to_string(*r.first_use[k]) : std::string());
    }
    row.push_back(fmt(r.seconds));
    row.push_back(r.ok ? "ok" : "failed: " + r.message);
    out += csv::format_row(row) + "\n";
  }
  return out;
}

SweepReport run_sweep(const Dataset& train, const Dataset& test, const TrainConfig& base,
                      std::vector<double> grid, std::vector<SweepModel>* models, const Dataset* pool) {
  if (grid.empty()) throw ConfigError("eta grid is empty");
  std::sort(grid.begin(), grid.end());
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) throw ConfigError("eta grid has duplicates");
  if (!(test.manifest() == train.manifest())) throw ConfigError("test manifest differs from training manifest");

  SweepReport report;
  for (const auto& f : train.manifest().families()) report.families.push_back(f.name);
  for (double eta : grid) {
    SweepRow row;
    row.eta = eta;
    const auto start = Clock::now();
    try {
      TrainConfig cfg = base;
      cfg.eta = eta;
      TrainResult res = train_compact(train, cfg, pool);
      const Metrics tr = batch_metrics(res.cascade, res.final_training_set);
      const Metrics te = batch_metrics(res.cascade, test);
      row.train_error = tr.error_rate;
      row.test_error = te.error_rate;
      row.negative_omega = te.negative_omega ? te.negative_omega->mean : 0.0;
      row.positive_omega = te.positive_omega ? te.positive_omega->mean : 0.0;
      row.first_use = first_use(res.cascade);
      row.seconds = seconds_since(start);
      if (models) models->push_back({eta, std::move(res.cascade)});
      report.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
      row.seconds = seconds_since(start);
      report.rows.push_back(std::move(row));
      break;
    }
  }
  return report;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const fs::path& dir = require(config.out, "out");
  const std::uint64_t seed = config.train.seed;
  const Dataset data = synth_generate(config.generator, seed);
  write_atomic(dir / "manifest.json", manifest_text(data.manifest()));
  write_atomic(dir / "data.csv", dataset_to_csv(data));
  if (config.test_positives > 0 || config.test_negatives > 0) {
    GeneratorConfig held = config.generator;
    held.positives = config.test_positives;
    held.negatives = config.test_negatives;
    write_atomic(dir / "test.csv", dataset_to_csv(synth_generate(held, derive_seed(seed, 2))));
  }
  if (config.pool_negatives > 0) {
    GeneratorConfig pool = config.generator;
    pool.positives = 0;
    pool.negatives = config.pool_negatives;
    write_atomic(dir / "pool.csv", dataset_to_csv(synth_generate(pool, derive_seed(seed, 3))));
  }
  out << "family,features,unit_cost,trigger_group,disc,single_feature_bayes_error\n";
  for (const auto& f : config.generator.families) {
    out << csv::format_row({f.name, std::to_string(f.features), fmt(f.unit_cost), f.trigger_group.value_or(""),
                            fmt(f.disc), fmt(single_feature_bayes_error(f.disc, config.generator.delta))})
        << "\n";
  }
  out << "wrote " << (dir / "data.csv").string() << " (" << data.count(Label::positive()) << " positive, "
      << data.count(Label::negative()) << " negative)\n";
  return kOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate_paths();
  const auto manifest = load_manifest_file(require(config.manifest, "manifest"));
  const Dataset train = load_dataset(require(config.data, "data"), manifest);
  const fs::path& model_path = require(config.out, "out");
  std::optional<Dataset> pool;
  if (config.pool) pool.emplace(load_dataset(*config.pool, manifest));

  const auto start = Clock::now();
  const TrainResult res = train_compact(train, config.train, pool ? &*pool : nullptr);
  const double seconds = seconds_since(start);

  const fs::path log_path = config.log ? *config.log : fs::path(model_path.string() + ".log.csv");
  write_atomic(model_path, serialize(res.cascade));
  write_atomic(log_path, train_log_csv(res.log));
  out << "stages " << res.cascade.size() << "\n"
      << "train_error " << fmt(res.log.back().train_error) << "\n"
      << "seconds " << fmt(seconds) << "\n"
      << "model " << model_path.string() << "\n"
      << "log " << log_path.string() << "\n";
  return kOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  config.validate_paths();
  const Cascade cascade = load_model(require(config.model, "model"));
  if (config.manifest) {
    const auto given = load_manifest_file(*config.manifest);
    if (!(*given == cascade.manifest())) {
      throw ConfigError("manifest mismatch: " + config.manifest->string() +
                        " differs from the manifest stored in the model");
    }
  }
  const Dataset data = load_dataset(require(config.data, "data"), cascade.manifest_ptr());
  std::optional<ExternalScores> scores;
  if (config.scores) scores = parse_scores_csv(read_file(*config.scores));

  const auto start = Clock::now();
  const Metrics m = batch_metrics(cascade, data, scores ? &*scores : nullptr);
  const double seconds = seconds_since(start);

  nlohmann::json report = m.to_json();
  report["seconds_per_example"] = seconds / static_cast<double>(data.size());
  const std::string text = report.dump(2) + "\n";
  if (config.out) write_atomic(*config.out, text);
  out << text;
  return kOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  config.validate_paths();
  if (config.eta_grid.empty()) throw ConfigError("sweep needs a non-empty eta_grid");
  const auto manifest = load_manifest_file(require(config.manifest, "manifest"));
  const Dataset train = load_dataset(require(config.data, "data"), manifest);
  const Dataset test = load_dataset(require(config.test, "test"), manifest);
  const fs::path& dir = require(config.out, "out");
  std::optional<Dataset> pool;
  if (config.pool) pool.emplace(load_dataset(*config.pool, manifest));

  std::vector<SweepModel> models;
  const SweepReport report = run_sweep(train, test, config.train, config.eta_grid, &models, pool ? &*pool : nullptr);
  for (const auto& sm : models) {
    const std::string tag = "eta" + fmt(sm.eta);
    write_atomic(dir / ("model_" + tag + ".json"), serialize(sm.cascade));
    write_atomic(dir / ("stages_" + tag + ".csv"), stage_configuration_csv(sm.cascade));
  }
  write_atomic(dir / "sweep.csv", report.to_csv());
  out << report.to_csv();
  const bool failed = std::any_of(report.rows.begin(), report.rows.end(), [](const SweepRow& r) { return !r.ok; });
  return failed ? kDataError : kOk;
}

int cmd_embed(const RunConfig& config, std::ostream& out) {
  config.validate_paths();
  const Cascade cascade = load_model(require(config.model, "model"));
  const Dataset data = load_dataset(require(config.data, "data"), cascade.manifest_ptr());
  const ExternalScores scores = parse_scores_csv(read_file(require(config.scores, "scores")));
  const fs::path& model_path = require(config.out, "out");

  const Metrics before = batch_metrics(cascade, data);
  const EmbedResult res = embed_external_stage(cascade, scores, data, config.train.eta);
  const Metrics after = batch_metrics(res.cascade, data, &scores);
  write_atomic(model_path, serialize(res.cascade));
  out << "alpha " << fmt(res.alpha) << "\n"
      << "active " << res.active << "\n"
      << "train_error_before " << fmt(before.error_rate) << "\n"
      << "train_error_after " << fmt(after.error_rate) << "\n"
      << "model " << model_path.string() << "\n";
  return kOk;
}

int exit_code_for(std::exception_ptr error, std::ostream& err) {
  try {
    std::rethrow_exception(error);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (...) {
    err << "internal error\n";
    return kInternal;
  }
}

}  // namespace compact::harness
