// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <cmath>
#include <limits>

#include "compact/cascade.hpp"
#include "compact/errors.hpp"
#include "compact/rng.hpp"
#include "oracles.hpp"

using namespace compact;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A: features 0..1 at cost 1, B: 2..3 at cost 4, G: 4..5 gated (unit 1, trigger 50).
std::shared_ptr<const FamilyManifest> small_manifest(bool with_trigger = true) {
  std::vector<FeatureFamily> fams{{"A", 0, 2, 1.0, std::nullopt, 0.0}, {"B", 2, 4, 4.0, std::nullopt, 0.0}};
  std::vector<TriggerGroup> groups;
  if (with_trigger) {
    fams.push_back({"G", 4, 6, 1.0, std::string("g"), 0.0});
    groups.push_back({"g", 50.0});
  }
  return std::make_shared<const FamilyManifest>(std::move(fams), std::move(groups));
}

std::shared_ptr<const FamilyManifest> wide_manifest(bool with_trigger) {
  std::vector<FeatureFamily> fams{{"a", 0, 6, 1.0, std::nullopt, 0.0},
                                  {"b", 6, 12, 2.0, std::nullopt, 0.0},
                                  {"c", 12, 18, 4.5, std::nullopt, 0.0}};
  std::vector<TriggerGroup> groups;
  if (with_trigger) {
    fams.push_back({"t", 18, 24, 1.0, std::string("t"), 0.0});
    fams.push_back({"u", 24, 28, 3.0, std::string("t"), 0.0});
    groups.push_back({"t", 50.0});
  }
  return std::make_shared<const FamilyManifest>(std::move(fams), std::move(groups));
}

std::vector<double> random_point(Rng& rng, std::size_t k) {
  std::vector<double> x(k);
  for (auto& v : x) v = rng.normal();
  return x;
}

Stage stump_stage(std::uint32_t f, double t, int p, double alpha, std::optional<double> thr) {
  return Stage{Tree::stump(f, t, p), alpha, thr};
}

std::string schema_path(const std::string& doc) {
  try {
    deserialize(doc);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("cascade construction rules") {
  auto m = small_manifest();
  CHECK_THROWS_AS(Cascade({}, m), InvalidInput);
  CHECK_THROWS_AS(Cascade({stump_stage(0, 0, 1, 1.0, std::nullopt), stump_stage(0, 0, 1, 1.0, std::nullopt)}, m),
                  InvalidInput);
  CHECK_THROWS_AS(Cascade({stump_stage(0, 0, 1, std::nan(""), std::nullopt)}, m), InvalidInput);
  CHECK_THROWS_AS(Cascade({stump_stage(9, 0, 1, 1.0, std::nullopt)}, m), InvalidInput);
  CHECK_THROWS_AS(Cascade({Stage{ExternalStage{}, 1.0, std::nullopt}, stump_stage(0, 0, 1, 1.0, std::nullopt)}, m),
                  InvalidInput);
  CHECK_THROWS_AS(Cascade({stump_stage(0, 0, 1, 1.0, std::nullopt)}, nullptr), InvalidInput);
  const Cascade ok({stump_stage(0, 0, 1, 1.0, 0.5), Stage{ExternalStage{}, 1.0, std::nullopt}}, m);
  CHECK(ok.has_external_stage());
}

TEST_CASE("rejection indicator and the boundary convention") {
  auto m = small_manifest();
  const Cascade c({stump_stage(0, 0.0, 1, 1.0, 1.0), stump_stage(1, 0.0, 1, 1.0, 0.5),
                   stump_stage(2, 0.0, 1, 1.0, std::nullopt)},
                  m);
  const std::vector<double> none;
  CHECK(rejection_indicator(c, none, 0));
  CHECK(rejection_indicator(c, std::vector<double>{-0.5, 0.0}, 1));
  // F + T == 0 is a rejection
  CHECK_FALSE(rejection_indicator(c, std::vector<double>{-1.0}, 1));
  CHECK_FALSE(rejection_indicator(c, std::vector<double>{0.0, -0.5}, 2));
  CHECK(rejection_indicator(c, std::vector<double>{0.0, -0.4}, 2));
  CHECK_THROWS_AS(rejection_indicator(c, none, 1), InvalidInput);
  CHECK_THROWS_AS(rejection_indicator(c, std::vector<double>{0, 0, 0, 0}, 4), InvalidInput);

  // evaluate applies the same rule: F_0 = -1 with T_0 = 1 is rejected
  const auto t = evaluate(c, std::vector<double>{-1.0, 0, 0, 0, 0, 0});
  CHECK_FALSE(t.survived);
  CHECK(t.rejected_at == std::optional<std::size_t>(0));
  CHECK_FALSE(t.predicted_positive());
}

TEST_CASE("evaluate meters cost up to the exit stage") {
  auto m = small_manifest();
  // stage 0 on A (cost 1), stage 1 on B (cost 4)
  const Cascade c({stump_stage(0, 0.0, 1, 1.0, 0.5), stump_stage(2, 0.0, 1, 1.0, std::nullopt)}, m);
  const auto kept = evaluate(c, std::vector<double>{1, 0, 1, 0, 0, 0});
  CHECK(kept.survived);
  CHECK(kept.total_omega == 5.0);
  CHECK(kept.average_omega == 2.5);
  CHECK(kept.partial_scores == std::vector<double>{1.0, 2.0});
  CHECK(kept.stage_costs == std::vector<double>{1.0, 4.0});
  CHECK(kept.predicted_positive());

  const auto dropped = evaluate(c, std::vector<double>{-1, 0, 1, 0, 0, 0});
  CHECK_FALSE(dropped.survived);
  CHECK(dropped.total_omega == 1.0);
  CHECK(dropped.average_omega == 0.5);
  CHECK(dropped.partial_scores.size() == 1);

  CHECK_THROWS_AS(evaluate(c, std::vector<double>{1, 2}), InvalidInput);
}

TEST_CASE("trigger cost is charged once per example") {
  auto m = small_manifest();
  const Cascade c({stump_stage(4, -kInf, 1, 1.0, 10.0), stump_stage(0, -kInf, 1, 1.0, 10.0),
                   stump_stage(5, -kInf, 1, 1.0, std::nullopt)},
                  m);
  const auto t = evaluate(c, std::vector<double>(6, 0.0));
  CHECK(t.stage_costs == std::vector<double>{51.0, 1.0, 1.0});
  CHECK(t.total_omega == 53.0);

  // a depth-2 tree touching both gated features pays the trigger once
  const Tree two({{4, 0.0}, {5, 0.0}, {5, 1.0}}, {1, 1, 1, 1});
  const Cascade d({Stage{two, 1.0, std::nullopt}}, m);
  CHECK(evaluate(d, std::vector<double>(6, 0.0)).total_omega == 52.0);
}

TEST_CASE("external stages need a score when reached") {
  auto m = small_manifest();
  const Cascade c({stump_stage(0, 0.0, 1, 1.0, 0.5), Stage{ExternalStage{}, 2.0, std::nullopt}}, m);
  const std::vector<double> pass{1, 0, 0, 0, 0, 0}, fail{-1, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(evaluate(c, pass), InvalidInput);
  CHECK_FALSE(evaluate(c, fail).survived);  // rejected before the external stage
  const auto t = evaluate(c, pass, -0.75);
  CHECK(t.final_score == 1.0 + 2.0 * -0.75);
  CHECK(t.total_omega == 1.0);
  CHECK(t.average_omega == 0.5);

  const Example ex{"e1", Label::positive(), pass};
  const ExternalScores scores{{"e1", 3.0}};
  CHECK(evaluate(c, ex, &scores).final_score == 7.0);
}

TEST_CASE("early exit agrees with full evaluation on random cascades") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const bool triggers = trial % 2 == 1;
    auto m = wide_manifest(triggers);
    const Cascade c = oracle::random_cascade(rng, m, 1 + rng.below(12), 1 + static_cast<int>(rng.below(3)));
    for (int e = 0; e < 200; ++e) {
      const auto x = random_point(rng, m->total_features());
      const auto t = evaluate(c, x);
      const auto full = oracle::full_evaluation(c, x);
      // the evaluated prefix matches the full evaluation exactly
      for (std::size_t k = 0; k < t.partial_scores.size(); ++k) REQUIRE(t.partial_scores[k] == full.partial[k]);
      // r_k never increases again once it drops
      for (std::size_t k = 1; k < c.size(); ++k) REQUIRE(full.reaches[k] <= full.reaches[k - 1]);
      std::size_t reached = 0;
      for (int r : full.reaches) reached += r;
      if (t.survived) {
        REQUIRE(reached == c.size());
        REQUIRE(t.final_score == full.partial.back());
      } else {
        REQUIRE(t.rejected_at);
        REQUIRE(*t.rejected_at + 1 == reached);
      }
      REQUIRE(t.total_omega == oracle::threaded_total_cost(c, x));
      if (!triggers) REQUIRE(t.average_omega == oracle::literal_average_complexity(c, x));

      // never more than running every stage
      double all = 0.0;
      for (double b : full.base_costs) all += b;
      REQUIRE(t.average_omega <= (triggers ? all + 50.0 : all) / static_cast<double>(c.size()));
    }
  }
}

TEST_CASE("metrics on degenerate cascades") {
  auto m = small_manifest(false);
  std::vector<Example> ex;
  for (int i = 0; i < 10; ++i) {
    ex.push_back({"p" + std::to_string(i), Label::positive(), {0.1 * i, 0, 0, 0}});
  }
  for (int i = 0; i < 30; ++i) {
    ex.push_back({"n" + std::to_string(i), Label::negative(), {-0.1 * i, 0, 0, 0}});
  }
  const Dataset data(ex, m);
  // always positive: every negative is an error
  const Cascade yes({stump_stage(0, -kInf, 1, 1.0, std::nullopt)}, m);
  const Metrics a = batch_metrics(yes, data);
  CHECK(a.error_rate == 0.75);
  CHECK(a.false_positive_rate == std::optional<double>(1.0));
  CHECK(a.false_negative_rate == std::optional<double>(0.0));
  CHECK(a.survivors == 40);
  REQUIRE(a.negative_omega);
  CHECK(a.negative_omega->mean == 1.0);
  CHECK(a.negative_omega->p99 == 1.0);
  CHECK(a.mean_average_omega == 1.0);

  // only positives: no false positive rate
  const Dataset pos(std::vector<Example>(ex.begin(), ex.begin() + 10), m);
  const Metrics b = batch_metrics(yes, pos);
  CHECK_FALSE(b.false_positive_rate);
  CHECK_FALSE(b.negative_omega);
  CHECK(b.roc.empty());
  const auto j = b.to_json();
  CHECK(j["false_positive_rate"].is_null());
  CHECK(j["negative_total_omega"].is_null());
  CHECK(j["error_rate"] == 0.0);
}

TEST_CASE("cost percentiles use nearest rank") {
  auto m = small_manifest(false);
  // stage 0 on A rejects x0 < 0; survivors also pay for B
  const Cascade c({stump_stage(0, 0.0, 1, 1.0, 0.5), stump_stage(2, 0.0, 1, 1.0, std::nullopt)}, m);
  std::vector<Example> ex;
  for (int i = 0; i < 100; ++i) {
    // 91 rejected (cost 1), 9 survive (cost 5)
    ex.push_back({"n" + std::to_string(i), Label::negative(), {i < 91 ? -1.0 : 1.0, 0, 0, 0}});
  }
  ex.push_back({"p", Label::positive(), {1, 0, 1, 0}});
  const Metrics mt = batch_metrics(c, Dataset(ex, m));
  REQUIRE(mt.negative_omega);
  CHECK(mt.negative_omega->p50 == 1.0);
  CHECK(mt.negative_omega->p90 == 1.0);
  CHECK(mt.negative_omega->p99 == 5.0);
  CHECK(mt.negative_omega->mean == doctest::Approx(1.36));
  CHECK(mt.positive_omega->mean == 5.0);
}

TEST_CASE("roc points are monotone") {
  Rng rng(5);
  auto m = wide_manifest(false);
  const Cascade c = oracle::random_cascade(rng, m, 6, 2);
  std::vector<Example> ex;
  for (int i = 0; i < 400; ++i) {
    ex.push_back({"e" + std::to_string(i), i % 3 ? Label::negative() : Label::positive(),
                  random_point(rng, m->total_features())});
  }
  const Metrics mt = batch_metrics(c, Dataset(ex, m));
  REQUIRE_FALSE(mt.roc.empty());
  for (std::size_t k = 1; k < mt.roc.size(); ++k) {
    CHECK(mt.roc[k].threshold < mt.roc[k - 1].threshold);
    CHECK(mt.roc[k].fpr >= mt.roc[k - 1].fpr);
    CHECK(mt.roc[k].tpr >= mt.roc[k - 1].tpr);
  }
  double pos_survivors = 0;
  for (const auto& e : ex) pos_survivors += e.label.is_positive() && evaluate(c, e).survived;
  CHECK(mt.roc.back().tpr == doctest::Approx(pos_survivors / static_cast<double>(mt.positives)));
}

TEST_CASE("serialization round trip is byte identical") {
  Rng rng(77);
  auto m = wide_manifest(true);
  CascadeMetadata md;
  md.seed = 99;
  md.config_digest = "abc";
  md.config = {{"eta", 0.5}};
  const Cascade base = oracle::random_cascade(rng, m, 9, 2);
  std::vector<Stage> stages = base.stages();
  stages[0].threshold = kInf;
  stages[1].learner = Tree::stump(3, -kInf, -1);
  stages[2].learner = Tree::stump(4, kInf, 1);
  stages[3].threshold = -kInf;
  const Cascade c(stages, m, md);

  const std::string text = serialize(c);
  const Cascade back = deserialize(text);
  CHECK(serialize(back) == text);
  CHECK(back.metadata().seed == 99);
  CHECK(back.metadata().config == md.config);
  CHECK(back.stages()[0].threshold == std::optional<double>(kInf));
  CHECK(back.stages()[3].threshold == std::optional<double>(-kInf));
  CHECK(back.stages()[1].tree() == Tree::stump(3, -kInf, -1));
  CHECK(back.manifest() == c.manifest());
  for (int e = 0; e < 2000; ++e) {
    const auto x = random_point(rng, m->total_features());
    const auto a = evaluate(c, x), b = evaluate(back, x);
    REQUIRE(a.final_score == b.final_score);
    REQUIRE(a.total_omega == b.total_omega);
    REQUIRE(a.rejected_at == b.rejected_at);
  }

  const Cascade ext({stump_stage(0, 0.25, 1, 0.5, -0.1), Stage{ExternalStage{}, 0.3, std::nullopt}}, m);
  CHECK(serialize(deserialize(serialize(ext))) == serialize(ext));
  CHECK(deserialize(serialize(ext)).has_external_stage());
}

TEST_CASE("deserialize names the broken field") {
  auto m = small_manifest();
  const Cascade c({stump_stage(0, 0.0, 1, 1.0, 0.5), stump_stage(2, 0.0, -1, 0.5, 0.25),
                   stump_stage(4, 1.0, 1, 0.25, std::nullopt)},
                  m);
  const auto good = cascade_to_json(c);
  auto tamper = [&](auto&& edit) {
    nlohmann::json d = good;
    edit(d);
    return schema_path(d.dump());
  };
  CHECK(schema_path(serialize(c)) == "<no error>");
  CHECK(schema_path("{not json") == "$");
  CHECK(tamper([](auto& d) { d["version"] = 2; }) == "version");
  CHECK(tamper([](auto& d) { d.erase("version"); }) == "$.version");
  CHECK(tamper([](auto& d) { d["stages"][1]["threshold"] = "high"; }) == "stages[1].threshold");
  CHECK(tamper([](auto& d) { d["stages"][1]["threshold"] = nullptr; }) == "stages");
  CHECK(tamper([](auto& d) { d["stages"][0]["nodes"][0]["feature"] = 40; }) == "stages[0].nodes[0].feature");
  CHECK(tamper([](auto& d) { d["stages"][0]["leaves"][0] = 0; }) == "stages[0].leaves[0]");
  CHECK(tamper([](auto& d) { d["stages"][0]["depth"] = 3; }) == "stages[0].depth");
  CHECK(tamper([](auto& d) { d["stages"][2]["kind"] = "forest"; }) == "stages[2].kind");
  CHECK(tamper([](auto& d) { d["stages"][2].erase("alpha"); }) == "stages[2].alpha");
  CHECK(tamper([](auto& d) { d["stages"] = nlohmann::json::array(); }) == "stages");
  CHECK(tamper([](auto& d) { d["manifest"]["families"][0]["unit_cost"] = -1; }).rfind("manifest", 0) == 0);
  CHECK(tamper([](auto& d) { d["metadata"]["seed"] = -4; }) == "metadata.seed");
}

TEST_CASE("json digest is stable and key-order independent") {
  const nlohmann::json a = nlohmann::json::parse(R"({"b":1,"a":[1,2]})");
  const nlohmann::json b = nlohmann::json::parse(R"({"a":[1,2],"b":1})");
  CHECK(json_digest(a) == json_digest(b));
  CHECK(json_digest(a).size() == 16);
  CHECK(json_digest(a) != json_digest(nlohmann::json::parse(R"({"a":[2,1],"b":1})")));
}
