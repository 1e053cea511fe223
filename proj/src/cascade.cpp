// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/cascade.hpp"

#include <algorithm>
#include <cmath>

#include "compact/errors.hpp"

namespace compact {

Cascade::Cascade(std::vector<Stage> stages, std::shared_ptr<const FamilyManifest> manifest,
                 CascadeMetadata metadata)
    : stages_(std::move(stages)), manifest_(std::move(manifest)), metadata_(std::move(metadata)) {
  if (!manifest_) throw InvalidInput("cascade requires a manifest");
  if (stages_.empty()) throw InvalidInput("cascade needs at least one stage");
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const Stage& s = stages_[k];
    const bool last = k + 1 == stages_.size();
    if (!std::isfinite(s.alpha)) throw InvalidInput("stage " + std::to_string(k) + ": non-finite alpha");
    if (!last && !s.threshold) {
      throw InvalidInput("stage " + std::to_string(k) + ": only the final stage may lack a threshold");
    }
    if (s.threshold && std::isnan(*s.threshold)) {
      throw InvalidInput("stage " + std::to_string(k) + ": NaN threshold");
    }
    if (s.is_external()) {
      if (!last) throw InvalidInput("stage " + std::to_string(k) + ": external stage must be last");
      if (s.threshold) throw InvalidInput("stage " + std::to_string(k) + ": external stage takes no threshold");
      continue;
    }
    for (std::size_t f : s.tree().distinct_features()) manifest_->family_of(f);
  }
}

bool rejection_indicator(const Cascade& cascade, std::span<const double> partial_scores,
                         std::size_t stage) {
  const auto& stages = cascade.stages();
  if (stage > stages.size()) throw InvalidInput("rejection_indicator: stage out of range");
  if (partial_scores.size() < stage) throw InvalidInput("rejection_indicator: too few partial scores");
  for (std::size_t j = 0; j < stage; ++j) {
    if (stages[j].threshold && !(partial_scores[j] + *stages[j].threshold > 0.0)) return false;
  }
  return true;
}

EvalTrace evaluate(const Cascade& cascade, std::span<const double> features,
                   std::optional<double> external_score) {
  const FamilyManifest& manifest = cascade.manifest();
  if (features.size() != manifest.total_features()) {
    throw InvalidInput("evaluate: example has " + std::to_string(features.size()) +
                       " features, manifest declares " + std::to_string(manifest.total_features()));
  }
  EvalTrace trace;
  const auto& stages = cascade.stages();
  trace.partial_scores.reserve(stages.size());
  trace.stage_costs.reserve(stages.size());
  TriggerState state;
  double score = 0.0;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const Stage& s = stages[k];
    double g;
    double cost = 0.0;
    if (s.is_external()) {
      if (!external_score) throw InvalidInput("evaluate: external stage reached without a score");
      g = *external_score;
    } else {
      g = s.tree().predict(features);
      auto charged = learner_cost_for_example(s.tree(), manifest, state);
      cost = charged.cost;
      state = charged.state;
    }
    score += s.alpha * g;
    trace.partial_scores.push_back(score);
    trace.stage_costs.push_back(cost);
    trace.total_omega += cost;
    if (s.threshold && !(score + *s.threshold > 0.0)) {
      trace.survived = false;
      trace.rejected_at = k;
      break;
    }
  }
  trace.final_score = score;
  trace.average_omega = trace.total_omega / static_cast<double>(stages.size());
  return trace;
}

EvalTrace evaluate(const Cascade& cascade, const Example& example, const ExternalScores* external) {
  std::optional<double> score;
  if (external != nullptr) {
    if (auto it = external->find(example.id); it != external->end()) score = it->second;
  }
  return evaluate(cascade, example.features, score);
}

namespace {

double percentile(std::vector<double> sorted, double q) {
  // nearest rank
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

std::optional<LabelCostStats> cost_stats(std::vector<double> costs) {
  if (costs.empty()) return std::nullopt;
  std::sort(costs.begin(), costs.end());
  LabelCostStats s;
  double total = 0.0;
  for (double c : costs) total += c;
  s.mean = total / static_cast<double>(costs.size());
  s.p50 = percentile(costs, 0.50);
  s.p90 = percentile(costs, 0.90);
  s.p99 = percentile(costs, 0.99);
  return s;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json stats_json(const std::optional<LabelCostStats>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"p50", s->p50}, {"p90", s->p90}, {"p99", s->p99}};
}

}  // namespace

Metrics metrics_from_traces(const Dataset& data, std::span<const EvalTrace> traces) {
  if (traces.size() != data.size()) throw InvalidInput("metrics: trace count mismatch");
  Metrics m;
  m.examples = data.size();
  std::size_t fp = 0, fn = 0;
  std::vector<double> pos_cost, neg_cost;
  double avg_total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool positive = data[i].label.is_positive();
    const EvalTrace& t = traces[i];
    const bool predicted = t.predicted_positive();
    (positive ? m.positives : m.negatives)++;
    if (positive && !predicted) ++fn;
    if (!positive && predicted) ++fp;
    m.survivors += t.survived;
    (positive ? pos_cost : neg_cost).push_back(t.total_omega);
    avg_total += t.average_omega;
  }
  m.errors = fp + fn;
  m.error_rate = static_cast<double>(m.errors) / static_cast<double>(m.examples);
  if (m.negatives) m.false_positive_rate = static_cast<double>(fp) / static_cast<double>(m.negatives);
  if (m.positives) m.false_negative_rate = static_cast<double>(fn) / static_cast<double>(m.positives);
  m.positive_omega = cost_stats(std::move(pos_cost));
  m.negative_omega = cost_stats(std::move(neg_cost));
  m.mean_average_omega = avg_total / static_cast<double>(m.examples);

  if (m.positives && m.negatives) {
    // survivors ranked by final score; rejected examples are never positive
    std::vector<std::pair<double, bool>> ranked;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (traces[i].survived) ranked.emplace_back(traces[i].final_score, data[i].label.is_positive());
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t tp = 0, fpc = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      (ranked[k].second ? tp : fpc)++;
      if (k + 1 == ranked.size() || ranked[k + 1].first < ranked[k].first) {
        m.roc.push_back({ranked[k].first, static_cast<double>(fpc) / static_cast<double>(m.negatives),
                         static_cast<double>(tp) / static_cast<double>(m.positives)});
      }
    }
  }
  return m;
}

Metrics batch_metrics(const Cascade& cascade, const Dataset& data, const ExternalScores* external) {
  std::vector<EvalTrace> traces;
  traces.reserve(data.size());
  for (const auto& ex : data.examples()) traces.push_back(evaluate(cascade, ex, external));
  return metrics_from_traces(data, traces);
}

nlohmann::json Metrics::to_json() const {
  nlohmann::json roc_json = nlohmann::json::array();
  for (const auto& p : roc) roc_json.push_back({p.threshold, p.fpr, p.tpr});
  return {{"examples", examples},
          {"positives", positives},
          {"negatives", negatives},
          {"errors", errors},
          {"error_rate", error_rate},
          {"false_positive_rate", optional_json(false_positive_rate)},
          {"false_negative_rate", optional_json(false_negative_rate)},
          {"survivors", survivors},
          {"positive_total_omega", stats_json(positive_omega)},
          {"negative_total_omega", stats_json(negative_omega)},
          {"mean_average_omega", mean_average_omega},
          {"roc", roc_json}};
}

}  // namespace compact
