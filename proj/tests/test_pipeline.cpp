// Copyright 2026 The slate-lens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <thread>

#include "support.hpp"
#include "slatelens/error.hpp"
#include "slatelens/pipeline.hpp"
#include "slatelens/synth.hpp"

using namespace slatelens;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void small_synth(const fs::path& dir, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.n_submissions = 100;
  c.n_reviewers = 70;
  c.n_organizations = 20;
  SynthGenerator g(c);
  g.plant_effect(Dimension::coauthorship, Measure::semantic_redundancy, -0.05);
  write_synth(g.generate(), dir);
}

json small_config(const fs::path& corpus, const fs::path& out) {
  return {{"corpus_dir", corpus.string()},
          {"output_dir", out.string()},
          {"topics",
           {{"k_grid", {3}},
            {"iterations", 60},
            {"burn_in", 30},
            {"samples", 2},
            {"spacing", 10},
            {"inference_iterations", 40},
            {"inference_burn_in", 20},
            {"inference_spacing", 5}}},
          {"causal", {{"permutations", 200}, {"min_triples", 10}}},
          {"seed", 3}};
}

PipelineConfig parse(const json& j) { return pipeline_config_from_json(j); }

}  // namespace

TEST_CASE("config validation") {
  const json ok = small_config("c", "o");
  CHECK_NOTHROW(parse(ok));

  auto without = ok;
  without.erase("corpus_dir");
  CHECK_THROWS_AS(parse(without), ConfigError);

  auto j = ok;
  j["calibration"] = {{"percentiles", {99, 1}}};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["calibration"] = {{"path", "a.json"}, {"reference_dir", "ref"}};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["topics"]["k_grid"] = {1, 3};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["causal"]["method"] = "bayesian";
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["causal"]["dimensions"] = {"height"};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["causal"]["fdr"] = 1.5;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["causal"]["caliper"] = 0.0;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["annotations"] = {{"source", "sidecar"}};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = ok;
  j["seed"] = "three";
  CHECK_THROWS_AS(parse(j), ConfigError);
}

TEST_CASE("config paths and serialization") {
  json j = small_config("corpus", "out");
  j["parallelism"] = 4;
  j["causal"]["method"] = "parametric";
  j["causal"]["outcomes"] = {"semantic_redundancy"};
  const auto c = pipeline_config_from_json(j, "/base");
  CHECK(c.corpus_dir == fs::path("/base/corpus"));
  CHECK(c.output_dir == fs::path("/base/out"));
  CHECK(c.causal.parametric);
  CHECK_FALSE(c.causal.nonparametric);
  CHECK(c.causal.outcomes == std::vector<Measure>{Measure::semantic_redundancy});
  CHECK(c.causal.seed == 3);
  const auto out = to_json(c);
  CHECK_FALSE(out.contains("parallelism"));
  CHECK(to_json(pipeline_config_from_json(out)) == out);
}

TEST_CASE("golden table") {
  const auto effects = json::parse(testing::slurp(testing::fixture("effects.json")));
  CHECK(render_table(effects) == testing::slurp(testing::fixture("effects_table.txt")));

  auto none = effects;
  for (auto& c : none["cells"]) c["significant"] = false;
  const auto plain = render_table(none);
  CHECK(std::count(plain.begin(), plain.end(), '*') == 2);  // the two legends
  none["cells"] = json::array();
  CHECK_THROWS_AS(render_table(none), DataError);
}

TEST_CASE("table layout: five dimensions, eight value columns") {
  json doc = {{"config", {{"causal", {{"significance", 0.01}}}}}, {"cells", json::array()}};
  for (auto d : kAllDimensions) {
    for (auto m : kAllMeasures) {
      doc["cells"].push_back({{"dimension", to_string(d)},
                              {"outcome", to_string(m)},
                              {"method", "parametric"},
                              {"gamma", 0.0125},
                              {"n", 50},
                              {"significant", false}});
    }
  }
  const auto table = render_table(doc);
  std::istringstream in(table);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 8);
  for (std::size_t i = 3; i < 8; ++i) {
    std::size_t values = 0;
    for (std::size_t p = lines[i].find("0.013"); p != std::string::npos; p = lines[i].find("0.013", p + 1)) ++values;
    CHECK(values == 8);
    CHECK(lines[i].find(" 50 ") != std::string::npos);
  }
}

TEST_CASE("end-to-end run, resume, parallelism") {
  testing::TempDir dir("pipe");
  small_synth(dir / "corpus", 17);
  const auto cfg = parse(small_config(dir / "corpus", dir / "out"));
  const auto report = run_pipeline(cfg, {false, true});
  for (const char* f : {"stages.json", "topic_model.json", "reviewer_topics.json", "treatments.json",
                        "pair_measures.json", "calibration.json", "effects.json", "effects.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / ("out/" + std::string(f))));
  }
  CHECK(report.effects.at("schema") == "slate-lens/effects/v1");
  CHECK(report.effects.at("cells").size() == 80);
  CHECK(report.table == testing::slurp(dir / "out/effects.txt"));
  CHECK(report.effects.at("topics").at("k") == 3);
  const auto effects = testing::slurp(dir / "out/effects.json");

  SUBCASE("resume after an interrupted causal stage") {
    const auto measured = fs::last_write_time(dir / "out/pair_measures.json");
    fs::remove(dir / "out/effects.json");
    fs::remove(dir / "out/effects.txt");
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    run_pipeline(cfg, {true, true});
    CHECK(testing::slurp(dir / "out/effects.json") == effects);
    CHECK(fs::last_write_time(dir / "out/pair_measures.json") == measured);

    // A changed causal setting reruns only what depends on it.
    auto changed = cfg;
    changed.causal.permutations = 300;
    run_pipeline(changed, {true, true});
    CHECK(testing::slurp(dir / "out/effects.json") != effects);
    CHECK(fs::last_write_time(dir / "out/pair_measures.json") == measured);
  }
  SUBCASE("one thread or eight, same bytes") {
    auto serial = cfg;
    serial.parallelism = 1;
    auto wide = cfg;
    wide.parallelism = 8;
    run_pipeline(serial, {false, true});
    const auto one = testing::slurp(dir / "out/effects.json");
    run_pipeline(wide, {false, true});
    const auto eight = testing::slurp(dir / "out/effects.json");
    CHECK(one == eight);
    CHECK(one == effects);
  }
}

TEST_CASE("missing sidecar annotations stop the measures stage") {
  testing::TempDir dir("pipe-sidecar");
  small_synth(dir / "corpus", 18);
  auto j = small_config(dir / "corpus", dir / "out");
  j["topics"]["enabled"] = false;
  j["annotations"] = {{"source", "sidecar"}, {"path", (dir / "nope/annotations.jsonl").string()}};
  try {
    run_pipeline(parse(j), {false, true});
    FAIL("expected a data error");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("stage measures") != std::string::npos);
    CHECK(what.find("nope/annotations.jsonl") != std::string::npos);
  }
  CHECK(fs::exists(dir / "out/treatments.json"));
}

TEST_CASE("sidecar annotations drive the measures") {
  testing::TempDir dir("pipe-bundle");
  small_synth(dir / "corpus", 19);
  const auto corpus = load_corpus(CorpusPaths::in_directory(dir / "corpus"));
  write_annotations(annotate_corpus(corpus, FallbackSource{}), dir / "annotations.jsonl");
  auto j = small_config(dir / "corpus", dir / "a");
  j["topics"]["enabled"] = false;
  const auto fallback = run_pipeline(parse(j), {false, true});
  j["output_dir"] = (dir / "b").string();
  j["annotations"] = {{"source", "sidecar"}, {"path", (dir / "annotations.jsonl").string()}};
  const auto sidecar = run_pipeline(parse(j), {false, true});
  const auto& a = fallback.effects.at("cells");
  const auto& b = sidecar.effects.at("cells");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].at("gamma").is_null()) {
      CHECK(b[i].at("gamma").is_null());
    } else {
      CHECK(a[i].at("gamma").get<double>() == doctest::Approx(b[i].at("gamma").get<double>()).epsilon(1e-9));
    }
  }
}

TEST_CASE("a run where every estimate fails is an estimation error") {
  testing::TempDir dir("pipe-fail");
  small_synth(dir / "corpus", 20);
  auto j = small_config(dir / "corpus", dir / "out");
  j["topics"]["enabled"] = false;
  j["causal"]["dimensions"] = {"topical"};
  CHECK_THROWS_AS(run_pipeline(parse(j), {false, true}), EstimationError);
  CHECK(fs::exists(dir / "out/effects.json"));
}
