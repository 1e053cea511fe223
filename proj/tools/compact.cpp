// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "compact/harness.hpp"

namespace h = compact::harness;

namespace {

struct Overrides {
  std::string config;
  std::optional<double> eta;
  std::optional<std::size_t> rounds;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, data, test, manifest, pool, model, scores, log;
  std::vector<double> eta_grid;
  std::optional<std::size_t> bootstrap_every;
  std::optional<std::size_t> positives, negatives, test_positives, test_negatives, pool_negatives;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--eta", o.eta, "complexity multiplier");
  cmd->add_option("--rounds", o.rounds, "number of stages");
  cmd->add_option("--depth", o.depth, "weak learner tree depth");
  cmd->add_option("--seed", o.seed, "seed for generation and candidate sampling");
  cmd->add_option("--out", o.out, "output file or directory");
}

h::RunConfig resolve(const Overrides& o) {
  h::RunConfig rc = o.config.empty() ? h::RunConfig{} : h::load_run_config(o.config);
  if (o.eta) rc.train.eta = *o.eta;
  if (o.rounds) rc.train.rounds = *o.rounds;
  if (o.depth) rc.train.depth = *o.depth;
  if (o.seed) rc.train.seed = *o.seed;
  if (o.bootstrap_every) rc.train.bootstrap_schedule = compact::every_nth_round(rc.train.rounds, *o.bootstrap_every);
  if (o.positives) rc.generator.positives = *o.positives;
  if (o.negatives) rc.generator.negatives = *o.negatives;
  if (o.test_positives) rc.test_positives = *o.test_positives;
  if (o.test_negatives) rc.test_negatives = *o.test_negatives;
  if (o.pool_negatives) rc.pool_negatives = *o.pool_negatives;
  auto set = [](auto& dst, const std::optional<std::string>& src) {
    if (src) dst = *src;
  };
  set(rc.out, o.out);
  set(rc.data, o.data);
  set(rc.test, o.test);
  set(rc.manifest, o.manifest);
  set(rc.pool, o.pool);
  set(rc.model, o.model);
  set(rc.scores, o.scores);
  set(rc.log, o.log);
  if (!o.eta_grid.empty()) rc.eta_grid = o.eta_grid;
  rc.train.validate();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complexity-aware cascade boosting"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset and manifest");
  add_common(synth, o);
  synth->add_option("--positives", o.positives, "positive examples in data.csv");
  synth->add_option("--negatives", o.negatives, "negative examples in data.csv");
  synth->add_option("--test-positives", o.test_positives, "positives in test.csv (0: no test split)");
  synth->add_option("--test-negatives", o.test_negatives, "negatives in test.csv");
  synth->add_option("--pool-negatives", o.pool_negatives, "negatives in pool.csv (0: no pool)");

  auto* train = app.add_subcommand("train", "train a cascade");
  add_common(train, o);
  train->add_option("--data", o.data, "training CSV");
  train->add_option("--manifest", o.manifest, "family manifest JSON");
  train->add_option("--pool", o.pool, "negative pool CSV for bootstrapping");
  train->add_option("--log", o.log, "training log CSV (default <out>.log.csv)");
  train->add_option("--bootstrap-every", o.bootstrap_every, "mine pool negatives every N stages");

  auto* eval = app.add_subcommand("eval", "evaluate a model");
  add_common(eval, o);
  eval->add_option("--model", o.model, "model JSON");
  eval->add_option("--data", o.data, "dataset CSV");
  eval->add_option("--manifest", o.manifest, "manifest to check against the model");
  eval->add_option("--scores", o.scores, "external scores CSV");

  auto* sweep = app.add_subcommand("sweep", "train one model per eta and report");
  add_common(sweep, o);
  sweep->add_option("--data", o.data, "training CSV");
  sweep->add_option("--test", o.test, "test CSV");
  sweep->add_option("--manifest", o.manifest, "family manifest JSON");
  sweep->add_option("--pool", o.pool, "negative pool CSV for bootstrapping");
  sweep->add_option("--eta-grid", o.eta_grid, "eta values")->delimiter(',');
  sweep->add_option("--bootstrap-every", o.bootstrap_every, "mine pool negatives every N stages");

  auto* embed = app.add_subcommand("embed", "append an external scorer as the final stage");
  add_common(embed, o);
  embed->add_option("--model", o.model, "model JSON");
  embed->add_option("--data", o.data, "training CSV");
  embed->add_option("--scores", o.scores, "external scores CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return h::kUsage;
  }

  return h::guarded(
      [&]() -> int {
        const h::RunConfig rc = resolve(o);
        if (synth->parsed()) return h::cmd_synth(rc, std::cout);
        if (train->parsed()) return h::cmd_train(rc, std::cout);
        if (eval->parsed()) return h::cmd_eval(rc, std::cout);
        if (sweep->parsed()) return h::cmd_sweep(rc, std::cout);
        return h::cmd_embed(rc, std::cout);
      },
      std::cerr);
}
