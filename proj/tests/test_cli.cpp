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

#include <sys/wait.h>

#include <cstdlib>

#include "support.hpp"
#include "slatelens/pipeline.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("'") + SLATELENS_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command line: exit codes and subcommands") {
  testing::TempDir dir("cli");
  const auto log = dir / "log.txt";

  CHECK(cli("", log) == 2);
  CHECK(cli("run", log) == 2);
  CHECK(cli("run --config '" + (dir / "missing.json").string() + "'", log) == 2);
  CHECK(cli("frobnicate", log) == 2);
  CHECK(cli("--help", log) == 0);

  // report
  CHECK(cli("report --effects '" + testing::fixture("effects.json").string() + "' --out '" + (dir / "t.txt").string() + "'",
            log) == 0);
  CHECK(testing::slurp(dir / "t.txt") == testing::slurp(testing::fixture("effects_table.txt")));
  CHECK(cli("report --effects '" + (dir / "none.json").string() + "'", log) == 3);

  // synth, annotate-fallback, calibrate
  testing::spit(dir / "synth.json", json{{"n_submissions", 200}, {"n_reviewers", 120}, {"n_organizations", 20}}.dump());
  REQUIRE(cli("synth --config '" + (dir / "synth.json").string() + "' --seed 5 --out '" + (dir / "corpus").string() + "'",
              log) == 0);
  CHECK(fs::exists(dir / "corpus/ground_truth.json"));
  CHECK(fs::exists(dir / "corpus/reviews.jsonl"));
  REQUIRE(cli("annotate-fallback --corpus '" + (dir / "corpus").string() + "' --out '" + (dir / "ann").string() + "'",
              log) == 0);
  CHECK(fs::exists(dir / "ann/sentences.jsonl"));
  CHECK(fs::exists(dir / "ann/annotations.jsonl"));
  CHECK(cli("calibrate --corpus '" + (dir / "corpus").string() + "' --out '" + (dir / "cal.json").string() +
                "' --annotations '" + (dir / "ann/annotations.jsonl").string() + "'",
            log) == 0);
  CHECK(fs::exists(dir / "cal.json"));
  CHECK(cli("calibrate --corpus '" + (dir / "nowhere").string() + "' --out '" + (dir / "c2.json").string() + "'", log) ==
        3);

  // run
  const json cfg = {{"corpus_dir", "corpus"},
                    {"output_dir", "out"},
                    {"topics", {{"enabled", false}}},
                    {"calibration", {{"path", "cal.json"}}},
                    {"causal", {{"min_triples", 5}}}};
  testing::spit(dir / "run.json", cfg.dump());
  const auto run = "run --quiet --config '" + (dir / "run.json").string() + "'";
  REQUIRE(cli(run + " --dimension seniority --outcome semantic_redundancy --method parametric --permutations 200",
              log) == 0);
  INFO(testing::slurp(log));
  const auto effects = json::parse(testing::slurp(dir / "out/effects.json"));
  CHECK(effects.at("cells").size() == 1);
  CHECK(testing::slurp(log) == testing::slurp(dir / "out/effects.txt"));
  CHECK(cli(run + " --method sideways", log) == 2);
  CHECK(cli(run + " --fdr 2", log) == 2);
  CHECK(cli(run + " --dimension topical", log) == 4);
  CHECK(cli(run + " --dimension height", log) == 2);

  auto broken = cfg;
  broken["corpus_dir"] = "nowhere";
  testing::spit(dir / "broken.json", broken.dump());
  CHECK(cli("run --quiet --config '" + (dir / "broken.json").string() + "'", log) == 3);
}
