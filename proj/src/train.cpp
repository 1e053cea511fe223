// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "compact/boost.hpp"
#include "compact/errors.hpp"
#include "compact/kernels.hpp"
#include "compact/rng.hpp"
#include "parallel.hpp"

namespace compact {

void TrainConfig::validate() const {
  if (rounds == 0) throw ConfigError("rounds must be positive");
  if (depth < 1 || depth > Tree::kMaxDepth) throw ConfigError("depth must lie in 1..10");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be a finite non-negative number");
  if (const auto* r = std::get_if<PositiveRecall>(&threshold); r && !(r->q > 0.0 && r->q <= 1.0)) {
    throw ConfigError("positive_recall q must lie in (0, 1]");
  }
  for (std::size_t k = 0; k < bootstrap_schedule.size(); ++k) {
    const std::size_t s = bootstrap_schedule[k];
    if (s == 0 || s >= rounds) throw ConfigError("bootstrap stages must lie in [1, rounds)");
    if (k > 0 && s <= bootstrap_schedule[k - 1]) {
      throw ConfigError("bootstrap schedule must be strictly increasing");
    }
  }
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json thr;
  if (const auto* c = std::get_if<ConstantThreshold>(&threshold)) {
    thr = {{"policy", "constant"}, {"value", c->value}};
  } else {
    thr = {{"policy", "positive_recall"}, {"q", std::get<PositiveRecall>(threshold).q}};
  }
  return {{"rounds", rounds},
          {"depth", depth},
          {"eta", eta},
          {"loss", "hinge"},
          {"threshold", thr},
          {"bootstrap", bootstrap_schedule},
          {"seed", seed},
          {"candidate_features", candidate_features}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw SchemaError("train", "expected an object");
  auto get = [&](const char* key, auto& out) {
    if (auto it = j.find(key); it != j.end()) {
      try {
        it->get_to(out);
      } catch (const nlohmann::json::exception&) {
        throw SchemaError(std::string("train.") + key, "wrong type");
      }
    }
  };
  get("rounds", c.rounds);
  get("depth", c.depth);
  get("eta", c.eta);
  get("bootstrap", c.bootstrap_schedule);
  get("seed", c.seed);
  get("candidate_features", c.candidate_features);
  get("threads", c.threads);
  if (auto it = j.find("loss"); it != j.end() && *it != "hinge") {
    throw SchemaError("train.loss", "only \"hinge\" is supported");
  }
  if (auto it = j.find("threshold"); it != j.end()) {
    const auto& t = *it;
    if (!t.is_object() || !t.contains("policy")) throw SchemaError("train.threshold", "expected {\"policy\": ...}");
    if (t["policy"] == "constant") {
      if (!t.contains("value") || !t["value"].is_number()) throw SchemaError("train.threshold.value", "expected a number");
      c.threshold = ConstantThreshold{t["value"].get<double>()};
    } else if (t["policy"] == "positive_recall") {
      double q = 1.0;
      if (t.contains("q")) {
        if (!t["q"].is_number()) throw SchemaError("train.threshold.q", "expected a number");
        q = t["q"].get<double>();
      }
      c.threshold = PositiveRecall{q};
    } else {
      throw SchemaError("train.threshold.policy", "expected \"constant\" or \"positive_recall\"");
    }
  }
  return c;
}

double full_score(const Cascade& cascade, std::span<const double> features) {
  double f = 0.0;
  for (const Stage& s : cascade.stages()) {
    if (!s.is_external()) f += s.alpha * s.tree().predict(features);
  }
  return f;
}

LagrangianValue cascade_lagrangian(const Cascade& cascade, const Dataset& data, double eta) {
  std::vector<double> scores, omegas;
  for (const auto& ex : data.examples()) {
    scores.push_back(full_score(cascade, ex.features));
    omegas.push_back(evaluate(cascade, ex.features).average_omega);
  }
  const auto labels = data.labels();
  LagrangianValue v;
  v.risk_e = empirical_risk(labels, scores);
  v.risk_c = complexity_risk(labels, omegas, ComplexityLoss{});
  v.value = lagrangian(v.risk_e, v.risk_c, {eta, ComplexityLoss{}});
  return v;
}

namespace {

std::string family_names(const Tree& tree, const FamilyManifest& manifest) {
  std::vector<std::size_t> fams;
  for (std::size_t f : tree.distinct_features()) fams.push_back(manifest.family_of(f));
  std::sort(fams.begin(), fams.end());
  fams.erase(std::unique(fams.begin(), fams.end()), fams.end());
  std::string out;
  for (std::size_t f : fams) {
    if (!out.empty()) out.push_back('|');
    out += manifest.families()[f].name;
  }
  return out;
}

// Candidate features for one round, grouped by family, ascending ids.
std::vector<std::vector<std::size_t>> draw_candidates(const FamilyManifest& manifest,
                                                      std::size_t budget, Rng& rng) {
  const auto& fams = manifest.families();
  const std::size_t total = manifest.total_features();
  std::vector<std::vector<std::size_t>> out(fams.size());
  const bool all = budget == 0 || budget >= total;
  for (std::size_t f = 0; f < fams.size(); ++f) {
    std::vector<std::size_t> ids(fams[f].size());
    std::iota(ids.begin(), ids.end(), fams[f].start);
    if (!all) {
      const double share = static_cast<double>(budget) * static_cast<double>(ids.size()) /
                           static_cast<double>(total);
      const std::size_t quota =
          std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(share)), 1, ids.size());
      for (std::size_t k = 0; k < quota; ++k) {
        std::swap(ids[k], ids[k + rng.below(ids.size() - k)]);
      }
      ids.resize(quota);
      std::sort(ids.begin(), ids.end());
    }
    out[f] = std::move(ids);
  }
  return out;
}

// Per-example training state, rebuilt from scratch after each bootstrap.
struct TrainingState {
  std::vector<Example> examples;
  std::vector<Label> labels;
  std::vector<double> y;
  FeatureMatrix x;
  SortedColumns sorted;
  std::vector<double> score;  // full predictor F(x), all stages
  std::vector<std::uint8_t> active;
  std::vector<TriggerState> triggers;
  std::vector<double> omega_total;

  TrainingState(std::vector<Example> ex, std::size_t features)
      : examples(std::move(ex)), x(examples, features), sorted(x) {
    const std::size_t n = examples.size();
    labels.reserve(n);
    y.reserve(n);
    for (const auto& e : examples) {
      labels.push_back(e.label);
      y.push_back(e.label.sign());
    }
    score.assign(n, 0.0);
    active.assign(n, 1);
    triggers.assign(n, TriggerState{});
    omega_total.assign(n, 0.0);
  }

  void replay(const Cascade& cascade) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
      score[i] = full_score(cascade, examples[i].features);
      const EvalTrace t = evaluate(cascade, examples[i].features);
      active[i] = t.survived ? 1 : 0;
      omega_total[i] = t.total_omega;
      TriggerState st;
      for (std::size_t k = 0; k < t.stage_costs.size(); ++k) {
        st = learner_cost_for_example(cascade.stages()[k].tree(), cascade.manifest(), st).state;
      }
      triggers[i] = st;
    }
  }
};

}  // namespace

TrainResult train_compact(const Dataset& train, const TrainConfig& config, const Dataset* negative_pool) {
  config.validate();
  if (train.count(Label::positive()) == 0 || train.count(Label::negative()) == 0) {
    throw ConfigError("training set must contain both positive and negative examples");
  }
  if (!config.bootstrap_schedule.empty() && negative_pool == nullptr) {
    throw ConfigError("bootstrap schedule given without a negative pool");
  }
  if (negative_pool != nullptr && !(negative_pool->manifest() == train.manifest())) {
    throw ConfigError("negative pool manifest differs from the training manifest");
  }

  const auto manifest_ptr = train.manifest_ptr();
  const FamilyManifest& manifest = *manifest_ptr;
  const std::size_t threads = detail::thread_budget(config.threads);
  const nlohmann::json config_json = config.to_json();
  CascadeMetadata metadata{json_digest(config_json), config.seed, "compact-1", config_json};

  TrainingState st(train.examples(), manifest.total_features());
  std::vector<std::uint8_t> pool_used(negative_pool ? negative_pool->size() : 0, 0);
  Rng rng(derive_seed(config.seed, 1));

  std::vector<Stage> stages;
  std::vector<RoundLog> log;
  std::size_t next_bootstrap = 0;

  for (std::size_t m = 0; m < config.rounds; ++m) {
    const std::size_t n = st.examples.size();
    std::vector<double> w(n), yw(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = exp_weight(st.labels[i], st.score[i]);
      yw[i] = st.y[i] * w[i];
    }
    std::size_t n_active = 0, n_active_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      n_active += st.active[i];
      n_active_neg += st.active[i] && st.y[i] < 0;
    }
    const double active_neg_fraction = static_cast<double>(n_active_neg) / static_cast<double>(n);

    // Every active example has evaluated every stage so far, so active examples
    // normally share one trigger state and each candidate costs them the same.
    std::optional<TriggerState> shared_state;
    bool uniform = true;
    for (std::size_t i = 0; i < n && uniform; ++i) {
      if (!st.active[i]) continue;
      if (shared_state && !(*shared_state == st.triggers[i])) uniform = false;
      shared_state = st.triggers[i];
    }

    const auto groups = draw_candidates(manifest, config.candidate_features, rng);
    std::vector<std::optional<Candidate>> fitted(groups.size());
    std::vector<std::vector<double>> outputs(groups.size());
    std::vector<char> used_fast(groups.size(), 1);
    detail::parallel_for(groups.size(), threads, [&](std::size_t f) {
      if (groups[f].empty()) return;
      Tree tree = fit_tree(st.x, st.sorted, groups[f], yw, config.depth);
      std::vector<double> g(n);
      tree.predict_batch(st.x, g);
      const double edge = kernels::dot(yw, g);
      const double base = learner_base_cost(tree, manifest);
      double score;
      if (uniform) {
        const double cost =
            learner_cost_for_example(tree, manifest, shared_state.value_or(TriggerState{})).cost;
        score = score_direction_fast(edge, n, cost, active_neg_fraction, m, config.eta);
      } else {
        std::vector<double> costs(n), psi(n);
        for (std::size_t i = 0; i < n; ++i) {
          costs[i] = learner_cost_for_example(tree, manifest, st.triggers[i]).cost;
          psi[i] = psi_weight(config.loss, st.labels[i], st.omega_total[i] / static_cast<double>(m + 1));
        }
        score = score_direction(g, st.labels, w, st.active, psi, costs, m, config.eta);
        used_fast[f] = 0;
      }
      fitted[f] = Candidate{std::move(tree), base, score};
      outputs[f] = std::move(g);
    });

    std::vector<Candidate> candidates;
    std::vector<std::size_t> origin;
    for (std::size_t f = 0; f < fitted.size(); ++f) {
      if (fitted[f]) {
        candidates.push_back(*fitted[f]);
        origin.push_back(f);
      }
    }
    const std::size_t pick = select_weak_learner(candidates);
    const Candidate& chosen = candidates[pick];
    const std::vector<double>& g = outputs[origin[pick]];

    RoundLog row;
    row.round = m;
    row.family = family_names(chosen.learner, manifest);
    row.score = chosen.score;
    row.edge_term = kernels::dot(yw, g) / static_cast<double>(n);
    row.complexity_term = row.edge_term - chosen.score;
    row.base_cost = chosen.base_cost;
    row.active = n_active;
    row.active_negatives = n_active_neg;
    row.fast_path = used_fast[origin[pick]] != 0;

    const double alpha = closed_form_alpha(st.labels, w, g);
    row.alpha = alpha;
    kernels::axpy(st.score, g, alpha);

    for (std::size_t i = 0; i < n; ++i) {
      if (!st.active[i]) continue;
      const auto charged = learner_cost_for_example(chosen.learner, manifest, st.triggers[i]);
      st.omega_total[i] += charged.cost;
      st.triggers[i] = charged.state;
    }

    Stage stage{chosen.learner, alpha, std::nullopt};
    if (m + 1 < config.rounds) {
      std::vector<double> positive_scores;
      for (std::size_t i = 0; i < n; ++i) {
        if (st.active[i] && st.y[i] > 0) positive_scores.push_back(st.score[i]);
      }
      if (positive_scores.empty() && std::holds_alternative<PositiveRecall>(config.threshold)) {
        throw ConfigError("no positive example survives to stage " + std::to_string(m + 1));
      }
      const double t = calibrate_threshold(config.threshold, positive_scores);
      stage.threshold = t;
      for (std::size_t i = 0; i < n; ++i) {
        if (st.active[i] && !(st.score[i] + t > 0.0)) st.active[i] = 0;
      }
    }
    row.threshold = stage.threshold;
    stages.push_back(std::move(stage));

    std::size_t errors = 0;
    std::vector<double> avg_omega(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool predicted = st.active[i] && st.score[i] > 0.0;
      errors += predicted != (st.y[i] > 0);
      avg_omega[i] = st.omega_total[i] / static_cast<double>(m + 1);
    }
    row.train_error = static_cast<double>(errors) / static_cast<double>(n);
    row.risk_e = empirical_risk(st.labels, st.score);
    row.risk_c = complexity_risk(st.labels, avg_omega, config.loss);
    row.lagrangian = lagrangian(row.risk_e, row.risk_c, {config.eta, config.loss});

    if (next_bootstrap < config.bootstrap_schedule.size() &&
        config.bootstrap_schedule[next_bootstrap] == m + 1) {
      ++next_bootstrap;
      const Cascade partial(stages, manifest_ptr, metadata);
      // rejected negatives, most confidently rejected first
      std::vector<std::size_t> rejected;
      for (std::size_t i = 0; i < n; ++i) {
        if (st.y[i] < 0 && !st.active[i]) rejected.push_back(i);
      }
      std::stable_sort(rejected.begin(), rejected.end(),
                       [&](std::size_t a, std::size_t b) { return st.score[a] < st.score[b]; });
      const BootstrapResult mined = bootstrap_negatives(partial, *negative_pool, rejected.size(), pool_used);
      row.bootstrap_added = mined.selected.size();
      row.bootstrap_shortfall = mined.shortfall;
      if (!mined.selected.empty()) {
        std::vector<std::uint8_t> drop(n, 0);
        for (std::size_t k = 0; k < mined.selected.size(); ++k) drop[rejected[k]] = 1;
        std::vector<Example> kept;
        for (std::size_t i = 0; i < n; ++i) {
          if (!drop[i]) kept.push_back(st.examples[i]);
        }
        for (std::size_t idx : mined.selected) {
          pool_used[idx] = 1;
          kept.push_back((*negative_pool)[idx]);
        }
        TrainingState rebuilt(std::move(kept), manifest.total_features());
        rebuilt.replay(partial);
        st = std::move(rebuilt);
      }
    }
    log.push_back(std::move(row));
  }

  Cascade cascade(std::move(stages), manifest_ptr, std::move(metadata));
  Dataset final_set(std::move(st.examples), manifest_ptr);
  return {std::move(cascade), std::move(log), std::move(final_set)};
}

EmbedResult embed_external_stage(const Cascade& cascade, const ExternalScores& scores,
                                 const Dataset& data, double eta) {
  if (cascade.has_external_stage()) throw InvalidInput("cascade already ends in an external stage");
  std::vector<Stage> stages = cascade.stages();

  std::vector<EvalTrace> traces;
  std::vector<double> positives;
  for (const auto& ex : data.examples()) {
    traces.push_back(evaluate(cascade, ex.features));
    if (traces.back().survived && ex.label.is_positive()) positives.push_back(traces.back().final_score);
  }
  double gate = 0.0;
  if (!positives.empty()) gate = std::max(0.0, calibrate_threshold(PositiveRecall{1.0}, positives));
  stages.back().threshold = gate;

  std::vector<Label> labels;
  std::vector<double> base, ext;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const EvalTrace& t = traces[i];
    if (!t.survived || !(t.final_score + gate > 0.0)) continue;
    const auto it = scores.find(data[i].id);
    if (it == scores.end()) {
      missing.push_back(data[i].id);
      continue;
    }
    labels.push_back(data[i].label);
    base.push_back(t.final_score);
    ext.push_back(it->second);
  }
  if (!missing.empty()) {
    std::string msg = "external scores missing for " + std::to_string(missing.size()) + " active example(s):";
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) msg += " " + missing[k];
    if (missing.size() > 20) msg += " ...";
    throw InvalidInput(msg);
  }
  double alpha = 0.0;
  if (!labels.empty()) alpha = line_search_alpha(labels, base, ext, eta, 0.0);
  stages.push_back(Stage{ExternalStage{}, alpha, std::nullopt});
  const std::size_t active = labels.size();
  return {Cascade(std::move(stages), cascade.manifest_ptr(), cascade.metadata()), alpha, active};
}

}  // namespace compact
