// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Complexity-aware cascade boosting.
//
// Each round picks the weak learner g maximizing
//
//   D[g] = (1/N) sum_i y_i [ w_i g_i + eta r_i psi_i Omega_i(g) / (m + 1) ]
//
// where w_i = exp(-y_i F(x_i)), r_i marks examples that survive the current
// cascade (active), psi_i = -tau'(y_i Omega(F(x_i))) and m is the current cascade
// length. With the hinge complexity loss psi is 1 on negatives and 0 on
// positives, and when every active example pays the same cost Omega_g the
// complexity term collapses to (eta / (m + 1)) (|S_a^-| / N) Omega_g.
// With eta = 0 this is plain AdaBoost.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "compact/cascade.hpp"
#include "compact/core.hpp"
#include "compact/dataset.hpp"
#include "compact/tree.hpp"

namespace compact {

/// Selection score, evaluated term by term. `active` holds 0/1 flags and
/// `psi` the complexity weights; `g_costs[i]` is the cost example i would pay
/// for g. Throws InvalidInput on length mismatch.
double score_direction(std::span<const double> g, std::span<const Label> labels,
                       std::span<const double> weights, std::span<const std::uint8_t> active,
                       std::span<const double> psi, std::span<const double> g_costs, std::size_t m,
                       double eta);

/// Closed form for learners whose cost is the same on every active example
/// (hinge loss). `edge_sum` is sum_i y_i w_i g_i and `active_neg_fraction` is
/// |S_a^-| / N.
double score_direction_fast(double edge_sum, std::size_t n_total, double cost,
                            double active_neg_fraction, std::size_t m, double eta);

/// As above, but checks the precondition: returns nullopt (and computes
/// nothing) when the active examples do not all share one cost.
std::optional<double> score_direction_fast_checked(double edge_sum, std::span<const Label> labels,
                                                   std::span<const double> g_costs,
                                                   std::span<const std::uint8_t> active,
                                                   std::size_t m, double eta);

struct Candidate {
  Tree learner;
  double base_cost = 0.0;
  double score = 0.0;  ///< D[g]
};

/// Index of the candidate with the largest score. Ties: smaller base cost,
/// then smaller lowest feature id, then smaller root threshold.
/// Throws ConfigError on an empty pool.
std::size_t select_weak_learner(std::span<const Candidate> candidates);

inline constexpr double kAlphaSmoothing = 1e-10;
/// 0.5 * ln(1e12)
inline const double kAlphaMax = 0.5 * 27.631021115928547;

/// 0.5 ln((W_correct + eps) / (W_wrong + eps)), clamped to [-kAlphaMax, kAlphaMax].
double closed_form_alpha(std::span<const Label> labels, std::span<const double> weights,
                         std::span<const double> g);

/// Golden-section minimization of the empirical risk of F + alpha g over
/// alpha in [0, kAlphaMax] to tolerance 1e-8. The complexity term of the
/// Lagrangian does not depend on alpha for a fixed g, so `complexity_term` only
/// shifts the objective. Returns 0 when g is identically zero.
double line_search_alpha(std::span<const Label> labels, std::span<const double> scores,
                         std::span<const double> g, double eta = 0.0, double complexity_term = 0.0);

struct ConstantThreshold {
  double value = 0.0;
};
/// Keep at least a fraction q of the positives that reach the stage.
struct PositiveRecall {
  double q = 1.0;
};
using ThresholdPolicy = std::variant<ConstantThreshold, PositiveRecall>;

/// Stage threshold T. PositiveRecall(q): T = -(score of the lowest kept positive)
/// + 1e-12, nudged up until that positive strictly survives F + T > 0.
/// Throws InvalidInput for q outside (0, 1] or no positive scores.
double calibrate_threshold(const ThresholdPolicy& policy, std::span<const double> positive_scores);

struct BootstrapResult {
  std::vector<std::size_t> selected;  ///< pool indices, highest score first
  std::size_t shortfall = 0;
};

/// Scores every pool negative not in `exclude` with the cascade (early exit)
/// and returns up to `target` survivors with the highest final score.
BootstrapResult bootstrap_negatives(const Cascade& cascade, const Dataset& pool, std::size_t target,
                                    std::span<const std::uint8_t> exclude = {});

struct TrainConfig {
  std::size_t rounds = 256;
  int depth = 2;
  double eta = 0.0;
  ComplexityLoss loss{};
  ThresholdPolicy threshold = PositiveRecall{1.0};
  /// Bootstrap after this many stages have been trained; strictly increasing, each < rounds.
  std::vector<std::size_t> bootstrap_schedule;
  std::uint64_t seed = 1;
  /// Features drawn per round, stratified by family; 0 means all features.
  std::size_t candidate_features = 256;
  /// Worker threads for candidate fitting; 0 reads COMPACT_THREADS, else hardware.
  std::size_t threads = 0;

  /// Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct RoundLog {
  std::size_t round = 0;
  std::string family;  ///< family names of the learner's features, '|'-joined
  double score = 0.0;  ///< D[g*]
  double edge_term = 0.0;
  double complexity_term = 0.0;
  double base_cost = 0.0;
  double alpha = 0.0;
  std::optional<double> threshold;
  std::size_t active = 0;  ///< |S_a| when the learner was chosen
  std::size_t active_negatives = 0;
  bool fast_path = true;
  double risk_e = 0.0;
  double risk_c = 0.0;
  double lagrangian = 0.0;
  double train_error = 0.0;
  std::optional<std::size_t> bootstrap_added;
  std::size_t bootstrap_shortfall = 0;
};

struct TrainResult {
  Cascade cascade;
  std::vector<RoundLog> log;
  Dataset final_training_set;
};

/// Trains an M-stage cascade. `negative_pool` is required when the bootstrap
/// schedule is non-empty. Throws ConfigError on single-class data.
TrainResult train_compact(const Dataset& train, const TrainConfig& config,
                          const Dataset* negative_pool = nullptr);

/// Training Lagrangian of a cascade on a dataset: empirical risk of the full
/// predictor plus eta times the hinge complexity risk of the metered average cost.
struct LagrangianValue {
  double risk_e;
  double risk_c;
  double value;
};
LagrangianValue cascade_lagrangian(const Cascade& cascade, const Dataset& data, double eta);

/// Sum of alpha_k g_k(x) over every tree stage, ignoring thresholds.
double full_score(const Cascade& cascade, std::span<const double> features);

struct EmbedResult {
  Cascade cascade;
  double alpha = 0.0;
  std::size_t active = 0;
};

/// Appends an external scorer as the terminal stage. The previous final stage
/// gets a PositiveRecall(1) threshold on `data`, lowered to 0 if needed so it
/// never rejects an example the cascade alone classifies positive. alpha comes
/// from line_search_alpha over the examples that reach the new stage. Throws
/// InvalidInput listing the ids of reaching examples without a score.
EmbedResult embed_external_stage(const Cascade& cascade, const ExternalScores& scores,
                                 const Dataset& data, double eta = 0.0);

}  // namespace compact
