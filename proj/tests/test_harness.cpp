// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// CLI tests run the real binary in a scratch directory.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "compact/errors.hpp"
#include "compact/harness.hpp"

using namespace compact;
namespace fs = std::filesystem;
namespace h = compact::harness;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

class Scratch {
 public:
  Scratch() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() /
           ("compact-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }
  std::string str(const std::string& name) const { return (dir_ / name).string(); }

  Run cli(const std::string& args) const {
    const std::string cmd = std::string(COMPACT_CLI_PATH) + " " + args + " >" + str("stdout.txt") + " 2>" +
                            str("stderr.txt");
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), h::read_file(dir_ / "stdout.txt"), h::read_file(dir_ / "stderr.txt")};
  }

  // small ladder dataset with a held-out split and a pool
  void synth(const std::string& sub, int seed = 7) const {
    const Run r = cli("synth --out " + str(sub) + " --seed " + std::to_string(seed) +
                      " --positives 120 --negatives 120 --test-positives 100 --test-negatives 100"
                      " --pool-negatives 600");
    REQUIRE(r.code == 0);
  }

 private:
  fs::path dir_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  Scratch s;
  CHECK(s.cli("--help").code == 0);
  CHECK(s.cli("").code == 1);
  CHECK(s.cli("frobnicate").code == 1);
  CHECK(s.cli("train --no-such-flag").code == 1);
  CHECK(s.cli("train --rounds many").code == 1);
  const Run missing = s.cli("train --rounds 4");
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--manifest") != std::string::npos);
}

TEST_CASE("synth is deterministic per seed") {
  Scratch s;
  s.synth("a", 3);
  s.synth("b", 3);
  s.synth("c", 4);
  CHECK(h::read_file(s / "a/data.csv") == h::read_file(s / "b/data.csv"));
  CHECK(h::read_file(s / "a/test.csv") == h::read_file(s / "b/test.csv"));
  CHECK(h::read_file(s / "a/pool.csv") == h::read_file(s / "b/pool.csv"));
  CHECK(h::read_file(s / "a/data.csv") != h::read_file(s / "c/data.csv"));
  CHECK(h::read_file(s / "a/manifest.json") == h::read_file(s / "c/manifest.json"));
  CHECK(h::read_file(s / "a/data.csv") != h::read_file(s / "a/test.csv"));

  const auto m = std::make_shared<const FamilyManifest>(load_manifest(h::read_file(s / "a/manifest.json")));
  const Dataset pool = parse_dataset_csv(h::read_file(s / "a/pool.csv"), m);
  CHECK(pool.size() == 600);
  CHECK(pool.count(Label::positive()) == 0);
}

TEST_CASE("train, eval and embed through the CLI") {
  Scratch s;
  s.synth("d");
  const std::string data = " --data " + s.str("d/data.csv") + " --manifest " + s.str("d/manifest.json");

  const Run t1 = s.cli("train" + data + " --rounds 20 --eta 0.5 --out " + s.str("m1.json"));
  REQUIRE(t1.code == 0);
  const Run t2 = s.cli("train" + data + " --rounds 20 --eta 0.5 --out " + s.str("m2.json") + " --log " +
                       s.str("custom.csv"));
  REQUIRE(t2.code == 0);
  CHECK(h::read_file(s / "m1.json") == h::read_file(s / "m2.json"));
  CHECK(lines(h::read_file(s / "m1.json.log.csv")) == 21);
  CHECK(h::read_file(s / "custom.csv") == h::read_file(s / "m1.json.log.csv"));

  SUBCASE("eval matches the library") {
    const Run e = s.cli("eval --model " + s.str("m1.json") + " --data " + s.str("d/test.csv") + " --out " +
                        s.str("metrics.json"));
    REQUIRE(e.code == 0);
    const auto j = nlohmann::json::parse(h::read_file(s / "metrics.json"));
    const Cascade c = deserialize(h::read_file(s / "m1.json"));
    const Dataset test = parse_dataset_csv(h::read_file(s / "d/test.csv"), c.manifest_ptr());
    const Metrics m = batch_metrics(c, test);
    CHECK(j["error_rate"].get<double>() == m.error_rate);
    CHECK(j["negative_total_omega"]["mean"].get<double>() == m.negative_omega->mean);
    CHECK(j.contains("seconds_per_example"));
  }
  SUBCASE("eval rejects a different manifest") {
    std::string other = h::read_file(s / "d/manifest.json");
    other.replace(other.find("\"unit_cost\":1.0"), 15, "\"unit_cost\":1.5");
    write(s / "other.json", other);
    const Run e = s.cli("eval --model " + s.str("m1.json") + " --data " + s.str("d/test.csv") + " --manifest " +
                        s.str("other.json"));
    CHECK(e.code == 2);
    CHECK(e.err.find("manifest") != std::string::npos);
  }
  SUBCASE("embed needs a score for every example that reaches it") {
    const Cascade c = deserialize(h::read_file(s / "m1.json"));
    const Dataset train = parse_dataset_csv(h::read_file(s / "d/data.csv"), c.manifest_ptr());
    std::vector<double> oracle;
    for (const auto& e : train.examples()) oracle.push_back(3.0 * e.label.sign());
    const std::string full = h::scores_to_csv(train, oracle);
    write(s / "scores.csv", full);
    const std::string base = "embed --model " + s.str("m1.json") + " --data " + s.str("d/data.csv");
    const Run ok = s.cli(base + " --scores " + s.str("scores.csv") + " --out " + s.str("emb.json"));
    REQUIRE(ok.code == 0);
    CHECK(deserialize(h::read_file(s / "emb.json")).has_external_stage());

    // keep only the header and the first score
    write(s / "short.csv", full.substr(0, full.find('\n', full.find('\n') + 1) + 1));
    const Run bad = s.cli(base + " --scores " + s.str("short.csv") + " --out " + s.str("emb2.json"));
    CHECK(bad.code == 2);
    CHECK(bad.err.find("missing") != std::string::npos);
    CHECK_FALSE(fs::exists(s / "emb2.json"));

    const Run ev = s.cli("eval --model " + s.str("emb.json") + " --data " + s.str("d/data.csv") + " --scores " +
                         s.str("scores.csv"));
    CHECK(ev.code == 0);
  }
  SUBCASE("bootstrapping from a pool file") {
    const Run b = s.cli("train" + data + " --rounds 16 --eta 0.5 --bootstrap-every 4 --pool " +
                        s.str("d/pool.csv") + " --out " + s.str("mb.json"));
    REQUIRE(b.code == 0);
    const std::string log = h::read_file(s / "mb.json.log.csv");
    CHECK(log.find(",,0\n") != std::string::npos);  // rounds without a bootstrap
    const Run no_pool = s.cli("train" + data + " --rounds 16 --bootstrap-every 4 --out " + s.str("mc.json"));
    CHECK(no_pool.code == 2);
  }
}

TEST_CASE("data errors exit 2 and name the location") {
  Scratch s;
  s.synth("d");
  const std::string man = " --manifest " + s.str("d/manifest.json");
  CHECK(s.cli("train --data " + s.str("nope.csv") + man + " --out " + s.str("m.json")).code == 2);

  std::string csv = h::read_file(s / "d/data.csv");
  const auto third = csv.find('\n', csv.find('\n', csv.find('\n') + 1) + 1);
  csv.insert(third, ",extra");
  write(s / "broken.csv", csv);
  const Run r = s.cli("train --data " + s.str("broken.csv") + man + " --out " + s.str("m.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("broken.csv") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "m.json"));

  write(s / "model.json", "{\"version\":1}");
  const Run m = s.cli("eval --model " + s.str("model.json") + " --data " + s.str("d/data.csv"));
  CHECK(m.code == 2);
  CHECK(m.err.find("manifest") != std::string::npos);

  write(s / "cfg.json", R"({"train":{"rounds":"ten"}})");
  CHECK(s.cli("train --config " + s.str("cfg.json")).code == 2);
  CHECK(s.cli("train --rounds 0 --data x --manifest y --out z").code == 2);
  // the same file for two roles
  CHECK(s.cli("train --data " + s.str("d/data.csv") + man + " --out " + s.str("d/data.csv")).code == 2);
}

TEST_CASE("sweep writes one model per grid value") {
  Scratch s;
  s.synth("d");
  const std::string base = "sweep --data " + s.str("d/data.csv") + " --test " + s.str("d/test.csv") +
                           " --manifest " + s.str("d/manifest.json") + " --rounds 12 --out " + s.str("sw");
  const Run one = s.cli(base + " --eta-grid 0");
  REQUIRE(one.code == 0);
  const std::string report = h::read_file(s / "sw/sweep.csv");
  CHECK(lines(report) == 2);
  CHECK(report.rfind("eta,train_error,test_error,negative_total_omega", 0) == 0);
  CHECK(fs::exists(s / "sw/model_eta0.json"));
  CHECK(fs::exists(s / "sw/stages_eta0.csv"));

  const Run two = s.cli(base + " --eta-grid 1,0.1");
  REQUIRE(two.code == 0);
  const std::string sorted = h::read_file(s / "sw/sweep.csv");
  CHECK(sorted.find("\n0.1,") < sorted.find("\n1,"));

  CHECK(s.cli(base + " --eta-grid 1,1").code == 2);
  CHECK(s.cli(base).code == 2);
}

TEST_CASE("run config JSON") {
  const auto rc = h::run_config_from_json(nlohmann::json::parse(R"({
    "data": "a.csv", "out": "m.json", "seed": 11, "eta_grid": [0, 0.5],
    "train": {"rounds": 8, "eta": 0.25, "threshold": {"policy": "constant", "value": 0.5}},
    "generator": {"delta": 2.0, "shared_correlation": 0.1, "pool_negatives": 30,
                  "families": [{"name": "x", "features": 3, "unit_cost": 2.0, "disc": 0.4}]}
  })"));
  CHECK(rc.train.seed == 11);
  CHECK(rc.train.rounds == 8);
  CHECK(std::get<ConstantThreshold>(rc.train.threshold).value == 0.5);
  CHECK(rc.generator.delta == 2.0);
  CHECK(rc.generator.shared_correlation == 0.1);
  CHECK(rc.pool_negatives == 30);
  REQUIRE(rc.generator.families.size() == 1);
  CHECK(rc.generator.families[0].unit_cost == 2.0);
  const auto again = h::run_config_from_json(rc.to_json());
  CHECK(again.to_json() == rc.to_json());

  CHECK_THROWS_AS(h::run_config_from_json(nlohmann::json::parse(R"({"generator": {"delta": "x"}})")), SchemaError);
  CHECK_THROWS_AS(h::run_config_from_json(nlohmann::json::parse("[1]")), SchemaError);

  h::RunConfig dup;
  dup.data = "x.csv";
  dup.out = "./x.csv";
  CHECK_THROWS_AS(dup.validate_paths(), ConfigError);
}

TEST_CASE("scores CSV") {
  const auto s = h::parse_scores_csv("id,score\na,1.5\nb,-2\n");
  CHECK(s.at("a") == 1.5);
  CHECK(s.at("b") == -2.0);
  auto line_of = [](const std::string& text) {
    try {
      h::parse_scores_csv(text);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("<no error>");
  };
  CHECK(line_of("id,score\na,1\na,2\n") == "line 3");
  CHECK(line_of("id,score\na,x\n") == "line 2");
  CHECK(line_of("id,value\n") == "line 1");
  CHECK(line_of("id,score\na,nan\n") == "line 2");
}

TEST_CASE("first use and stage table") {
  auto m = std::make_shared<const FamilyManifest>(
      std::vector<FeatureFamily>{{"A", 0, 2, 1.0, std::nullopt, 0.0}, {"B", 2, 4, 4.0, std::nullopt, 0.0},
                                 {"C", 4, 5, 9.0, std::nullopt, 0.0}},
      std::vector<TriggerGroup>{});
  const Cascade c({Stage{Tree::stump(1, 0.0, 1), 1.0, 0.5}, Stage{Tree::stump(0, 0.0, 1), 1.0, 0.5},
                   Stage{Tree::stump(3, 0.0, 1), 0.5, std::nullopt}},
                  m);
  const auto fu = h::first_use(c);
  REQUIRE(fu.size() == 3);
  CHECK(fu[0] == std::optional<std::size_t>(0));
  CHECK(fu[1] == std::optional<std::size_t>(2));
  CHECK_FALSE(fu[2]);
  const std::string table = h::stage_configuration_csv(c);
  CHECK(table.rfind("stage,family,base_cost,alpha,threshold\n", 0) == 0);
  CHECK(lines(table) == 4);
}

TEST_CASE("write_atomic replaces the whole file") {
  const fs::path p = fs::temp_directory_path() / ("compact-atomic-" + std::to_string(::getpid()));
  h::write_atomic(p, "first version, longer\n");
  h::write_atomic(p, "second\n");
  CHECK(h::read_file(p) == "second\n");
  // a regular file cannot be a parent directory
  CHECK_THROWS_AS(h::write_atomic(p / "x", "y"), h::IoError);
  fs::remove(p);
  CHECK_THROWS_AS(h::read_file(p), h::IoError);
}
