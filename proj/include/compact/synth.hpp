// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic stand-in for image feature pools. Each feature is class-conditionally
// Gaussian with unit variance and means +/- disc * delta, so a single-feature
// stump has Bayes error Phi(-disc * delta). Features of one family may share a
// per-example latent (`correlation` in [0, 1)), which caps how much a family
// can achieve by stacking many of its own features; the per-feature marginals
// are unaffected.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "compact/dataset.hpp"
#include "compact/pool.hpp"

namespace compact {

struct SynthFamily {
  std::string name;
  std::size_t features = 1;
  double unit_cost = 1.0;
  std::optional<std::string> trigger_group;
  double disc = 0.0;
  double correlation = 0.0;
};

struct GeneratorConfig {
  std::vector<SynthFamily> families;
  std::vector<TriggerGroup> trigger_groups;
  std::size_t positives = 100;
  std::size_t negatives = 100;
  double delta = 1.0;
  /// Loading of one latent factor shared by every feature of an example, so
  /// hard examples look hard to all families. Family correlation plus this
  /// must stay below 1.
  double shared_correlation = 0.0;
};

/// Manifest implied by the generator config (families laid out in order).
FamilyManifest make_manifest(const GeneratorConfig& config);

/// Pure function of (config, seed). One class may be empty (negative pools);
/// throws InvalidInput when both are, or when there are no families.
Dataset synth_generate(const GeneratorConfig& config, std::uint64_t seed);

/// Bayes error of one feature of the given discriminativeness.
double single_feature_bayes_error(double disc, double delta);

/// Cost ladder 1 / 2 / 4 / 9 plus a trigger-gated family (unit 1, trigger 50),
/// with more expensive families more discriminative.
GeneratorConfig default_cost_ladder();

struct Benchmark {
  Dataset train;
  Dataset test;
  std::optional<Dataset> pool;  ///< negatives only, for bootstrapping
};

inline constexpr std::size_t kDefaultPoolNegatives = 50000;
inline constexpr std::size_t kDefaultBootstrapEvery = 16;

/// The ladder at its default size for training and for a held-out split
/// (seed derived with stream 2), plus a negative pool (stream 3).
Benchmark default_benchmark(std::uint64_t seed, std::size_t pool_negatives = kDefaultPoolNegatives);

/// {every, 2*every, ...} strictly below `rounds`; empty when every is 0.
std::vector<std::size_t> every_nth_round(std::size_t rounds, std::size_t every);

}  // namespace compact
