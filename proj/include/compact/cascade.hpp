// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Embedded cascade: stage k scores F_k(x) = F_{k-1}(x) + alpha_k g_k(x) and
// rejects when F_k(x) + T_k <= 0. The final stage has no threshold; the
// detection decision is the sign of the final score.
//
// Complexity is metered per example as it is evaluated: each stage charges its
// learner's cost under the example's trigger state. `average_omega` divides the
// total by the full cascade length m, counting unevaluated stages as zero.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "compact/dataset.hpp"
#include "compact/pool.hpp"
#include "compact/tree.hpp"

namespace compact {

/// A stage whose output g(x) is a score supplied by an external model
/// (looked up by example id). It is metered at zero cost.
struct ExternalStage {
  friend bool operator==(const ExternalStage&, const ExternalStage&) = default;
};

struct Stage {
  std::variant<Tree, ExternalStage> learner;
  double alpha = 0.0;
  std::optional<double> threshold;

  bool is_external() const { return std::holds_alternative<ExternalStage>(learner); }
  const Tree& tree() const { return std::get<Tree>(learner); }
};

struct CascadeMetadata {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string version = "compact-1";
  nlohmann::json config = nlohmann::json::object();  ///< training config echo
};

using ExternalScores = std::unordered_map<std::string, double>;

class Cascade {
 public:
  /// Throws InvalidInput on: no stages, non-finite alpha, a missing threshold
  /// anywhere but the last stage, an external stage that is not last, or a
  /// feature id outside the manifest.
  Cascade(std::vector<Stage> stages, std::shared_ptr<const FamilyManifest> manifest,
          CascadeMetadata metadata = {});

  const std::vector<Stage>& stages() const { return stages_; }
  std::size_t size() const { return stages_.size(); }
  const FamilyManifest& manifest() const { return *manifest_; }
  const std::shared_ptr<const FamilyManifest>& manifest_ptr() const { return manifest_; }
  const CascadeMetadata& metadata() const { return metadata_; }
  bool has_external_stage() const { return stages_.back().is_external(); }

 private:
  std::vector<Stage> stages_;
  std::shared_ptr<const FamilyManifest> manifest_;
  CascadeMetadata metadata_;
};

struct EvalTrace {
  double final_score = 0.0;  ///< score at the last evaluated stage
  bool survived = true;
  std::optional<std::size_t> rejected_at;  ///< 0-based stage index
  std::vector<double> partial_scores;      ///< F_k for evaluated stages
  std::vector<double> stage_costs;         ///< charged cost per evaluated stage
  double total_omega = 0.0;
  double average_omega = 0.0;

  bool predicted_positive() const { return survived && final_score > 0.0; }
};

/// True iff F_j + T_j > 0 for every thresholded stage j < `stage` (0-based), i.e.
/// the example reaches stage `stage`. Stage 0 is always reached.
/// `partial_scores` must hold at least `stage` entries.
bool rejection_indicator(const Cascade& cascade, std::span<const double> partial_scores,
                         std::size_t stage);

/// `external_score` is required only if the example reaches an external stage.
EvalTrace evaluate(const Cascade& cascade, std::span<const double> features,
                   std::optional<double> external_score = std::nullopt);
EvalTrace evaluate(const Cascade& cascade, const Example& example,
                   const ExternalScores* external = nullptr);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct LabelCostStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
};

struct Metrics {
  std::size_t examples = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t errors = 0;
  double error_rate = 0.0;
  std::optional<double> false_positive_rate;  ///< absent without negatives
  std::optional<double> false_negative_rate;  ///< absent without positives
  std::size_t survivors = 0;
  std::optional<LabelCostStats> positive_omega;
  std::optional<LabelCostStats> negative_omega;
  double mean_average_omega = 0.0;
  std::vector<RocPoint> roc;

  nlohmann::json to_json() const;
};

Metrics batch_metrics(const Cascade& cascade, const Dataset& data,
                      const ExternalScores* external = nullptr);
/// Metrics over precomputed traces (aligned with `data`).
Metrics metrics_from_traces(const Dataset& data, std::span<const EvalTrace> traces);

/// Canonical document: sorted keys, shortest round-trip floats, no whitespace
/// variance, so identical models give identical bytes.
std::string serialize(const Cascade& cascade);
nlohmann::json cascade_to_json(const Cascade& cascade);
/// Throws SchemaError with the path of the offending node.
Cascade deserialize(std::string_view document);
Cascade cascade_from_json(const nlohmann::json& doc);

/// FNV-1a 64 of a JSON value's canonical dump, as 16 hex digits.
std::string json_digest(const nlohmann::json& value);

}  // namespace compact
