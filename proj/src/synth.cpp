// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/synth.hpp"

#include <cmath>

#include "compact/errors.hpp"
#include "compact/rng.hpp"

namespace compact {

FamilyManifest make_manifest(const GeneratorConfig& config) {
  if (config.families.empty()) throw InvalidInput("generator config names no families");
  std::vector<FeatureFamily> families;
  std::size_t next = 0;
  for (const auto& f : config.families) {
    if (f.features == 0) throw InvalidInput("family '" + f.name + "' has no features");
    families.push_back({f.name, next, next + f.features, f.unit_cost, f.trigger_group, f.disc});
    next += f.features;
  }
  return FamilyManifest(std::move(families), config.trigger_groups);
}

Dataset synth_generate(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.positives + config.negatives == 0) throw InvalidInput("generator asked for no examples");
  const double gamma = config.shared_correlation;
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("shared correlation must lie in [0, 1)");
  for (const auto& f : config.families) {
    if (!(f.correlation >= 0.0 && f.correlation + gamma < 1.0)) {
      throw InvalidInput("family '" + f.name + "': correlation plus shared correlation must lie in [0, 1)");
    }
  }
  auto manifest = std::make_shared<const FamilyManifest>(make_manifest(config));
  const std::size_t n = config.positives + config.negatives;

  Rng rng(seed);
  std::vector<Label> labels(n, Label::negative());
  for (std::size_t i = 0; i < config.positives; ++i) labels[i] = Label::positive();
  for (std::size_t i = n - 1; i > 0; --i) std::swap(labels[i], labels[rng.below(i + 1)]);

  std::vector<Example> examples(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example& ex = examples[i];
    ex.id = "x" + std::to_string(i);
    ex.label = labels[i];
    ex.features.reserve(manifest->total_features());
    const double global = std::sqrt(gamma) * rng.normal();
    for (const auto& fam : config.families) {
      const double mean = ex.label.sign() * fam.disc * config.delta;
      const double shared = global + std::sqrt(fam.correlation) * rng.normal();
      const double own = std::sqrt(1.0 - gamma - fam.correlation);
      for (std::size_t j = 0; j < fam.features; ++j) {
        ex.features.push_back(mean + shared + own * rng.normal());
      }
    }
  }
  return Dataset(std::move(examples), std::move(manifest));
}

double single_feature_bayes_error(double disc, double delta) {
  return 0.5 * std::erfc(disc * delta / std::sqrt(2.0));
}

GeneratorConfig default_cost_ladder() {
  GeneratorConfig cfg;
  cfg.families = {
      {"acf", 30, 1.0, std::nullopt, 0.50, 0.0},
      {"ss", 30, 2.0, std::nullopt, 0.55, 0.0},
      {"cb", 30, 4.0, std::nullopt, 0.60, 0.0},
      {"lda", 20, 9.0, std::nullopt, 0.65, 0.0},
      {"cnn", 20, 1.0, std::string("cnn"), 0.75, 0.0},
  };
  cfg.trigger_groups = {{"cnn", 50.0}};
  cfg.positives = 1000;
  cfg.negatives = 1000;
  cfg.delta = 1.5;
  cfg.shared_correlation = 0.15;
  return cfg;
}

Benchmark default_benchmark(std::uint64_t seed, std::size_t pool_negatives) {
  const GeneratorConfig cfg = default_cost_ladder();
  GeneratorConfig pool_cfg = cfg;
  pool_cfg.positives = 0;
  pool_cfg.negatives = pool_negatives;
  return {synth_generate(cfg, seed), synth_generate(cfg, derive_seed(seed, 2)),
          pool_negatives ? std::optional<Dataset>(synth_generate(pool_cfg, derive_seed(seed, 3))) : std::nullopt};
}

std::vector<std::size_t> every_nth_round(std::size_t rounds, std::size_t every) {
  std::vector<std::size_t> out;
  if (every == 0) return out;
  for (std::size_t s = every; s < rounds; s += every) out.push_back(s);
  return out;
}

}  // namespace compact
