// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/boost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "compact/errors.hpp"
#include "compact/kernels.hpp"

namespace compact {

namespace {

void same_length(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(expected) + " vs " +
                       std::to_string(got) + ")");
  }
}

std::vector<double> signs(std::span<const Label> labels) {
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = labels[i].sign();
  return y;
}

}  // namespace

double score_direction(std::span<const double> g, std::span<const Label> labels,
                       std::span<const double> weights, std::span<const std::uint8_t> active,
                       std::span<const double> psi, std::span<const double> g_costs, std::size_t m,
                       double eta) {
  const std::size_t n = labels.size();
  if (n == 0) throw InvalidInput("score_direction: empty input");
  same_length(n, g.size(), "score_direction(g)");
  same_length(n, weights.size(), "score_direction(weights)");
  same_length(n, active.size(), "score_direction(active)");
  same_length(n, psi.size(), "score_direction(psi)");
  same_length(n, g_costs.size(), "score_direction(g_costs)");

  std::vector<double> yw(n);
  std::vector<double> complexity_coef(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = labels[i].sign();
    yw[i] = y * weights[i];
    complexity_coef[i] = active[i] ? y * psi[i] : 0.0;
  }
  const double edge = kernels::dot(yw, g);
  // inactive examples contribute an exact zero whatever their cost
  double complexity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (complexity_coef[i] != 0.0) complexity += complexity_coef[i] * g_costs[i];
  }
  const double scale = eta / static_cast<double>(m + 1);
  return (edge + scale * complexity) / static_cast<double>(n);
}

double score_direction_fast(double edge_sum, std::size_t n_total, double cost,
                            double active_neg_fraction, std::size_t m, double eta) {
  if (n_total == 0) throw InvalidInput("score_direction_fast: empty training set");
  const double edge_term = edge_sum / static_cast<double>(n_total);
  if (eta == 0.0 || active_neg_fraction == 0.0) return edge_term;
  return edge_term - eta / static_cast<double>(m + 1) * active_neg_fraction * cost;
}

std::optional<double> score_direction_fast_checked(double edge_sum, std::span<const Label> labels,
                                                   std::span<const double> g_costs,
                                                   std::span<const std::uint8_t> active,
                                                   std::size_t m, double eta) {
  const std::size_t n = labels.size();
  same_length(n, g_costs.size(), "score_direction_fast(g_costs)");
  same_length(n, active.size(), "score_direction_fast(active)");
  std::optional<double> shared;
  std::size_t active_neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    if (shared && *shared != g_costs[i]) return std::nullopt;
    shared = g_costs[i];
    active_neg += !labels[i].is_positive();
  }
  const double frac = static_cast<double>(active_neg) / static_cast<double>(n);
  return score_direction_fast(edge_sum, n, shared.value_or(0.0), frac, m, eta);
}

std::size_t select_weak_learner(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw ConfigError("select_weak_learner: empty weak-learner pool");
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.base_cost != b.base_cost) return a.base_cost < b.base_cost;
    if (a.learner.lowest_feature() != b.learner.lowest_feature()) {
      return a.learner.lowest_feature() < b.learner.lowest_feature();
    }
    return a.learner.splits()[0].threshold < b.learner.splits()[0].threshold;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (better(candidates[i], candidates[best])) best = i;
  }
  return best;
}

double closed_form_alpha(std::span<const Label> labels, std::span<const double> weights,
                         std::span<const double> g) {
  same_length(labels.size(), weights.size(), "closed_form_alpha(weights)");
  same_length(labels.size(), g.size(), "closed_form_alpha(g)");
  const auto y = signs(labels);
  double correct = 0.0, wrong = 0.0;
  kernels::agreement_sums(weights, y, g, correct, wrong);
  const double a = 0.5 * std::log((correct + kAlphaSmoothing) / (wrong + kAlphaSmoothing));
  return std::clamp(a, -kAlphaMax, kAlphaMax);
}

double line_search_alpha(std::span<const Label> labels, std::span<const double> scores,
                         std::span<const double> g, double eta, double complexity_term) {
  same_length(labels.size(), scores.size(), "line_search_alpha(scores)");
  same_length(labels.size(), g.size(), "line_search_alpha(g)");
  if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) return 0.0;

  const std::size_t n = labels.size();
  std::vector<double> w(n), slope(n), terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-labels[i].sign() * scores[i]);
    slope[i] = -labels[i].sign() * g[i];
  }
  // eta * complexity_term is a constant offset; adding it would only perturb
  // comparisons through rounding, so the minimizer is found without it
  (void)eta;
  (void)complexity_term;
  auto objective = [&](double alpha) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = w[i] * std::exp(alpha * slope[i]);
    return kernels::sum(terms) / static_cast<double>(n);
  };

  constexpr double kTol = 1e-8;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = kAlphaMax;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > kTol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  // the bracket never contains its end points; compare so a boundary optimum is exact
  double best = mid, best_f = objective(mid);
  for (double edge : {0.0, kAlphaMax}) {
    const double f = objective(edge);
    if (f < best_f) {
      best = edge;
      best_f = f;
    }
  }
  return best;
}

double calibrate_threshold(const ThresholdPolicy& policy, std::span<const double> positive_scores) {
  if (const auto* c = std::get_if<ConstantThreshold>(&policy)) return c->value;
  const double q = std::get<PositiveRecall>(policy).q;
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("PositiveRecall: q must lie in (0, 1]");
  if (positive_scores.empty()) throw InvalidInput("calibrate_threshold: no positive scores");
  std::vector<double> sorted(positive_scores.begin(), positive_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto keep = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, n);
  const double lowest_kept = sorted[n - keep];
  double t = -lowest_kept + 1e-12;
  while (!(lowest_kept + t > 0.0)) t = std::nextafter(t, std::numeric_limits<double>::infinity());
  return t;
}

BootstrapResult bootstrap_negatives(const Cascade& cascade, const Dataset& pool, std::size_t target,
                                    std::span<const std::uint8_t> exclude) {
  if (!exclude.empty()) same_length(pool.size(), exclude.size(), "bootstrap_negatives(exclude)");
  std::vector<std::pair<double, std::size_t>> survivors;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].label.is_positive() || (!exclude.empty() && exclude[i])) continue;
    const EvalTrace t = evaluate(cascade, pool[i].features);
    if (t.survived) survivors.emplace_back(t.final_score, i);
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  BootstrapResult out;
  const std::size_t take = std::min(target, survivors.size());
  for (std::size_t k = 0; k < take; ++k) out.selected.push_back(survivors[k].second);
  out.shortfall = target - take;
  return out;
}

}  // namespace compact
