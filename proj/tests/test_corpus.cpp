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

#include <set>
#include <string>

#include "slatelens/corpus.hpp"
#include "slatelens/error.hpp"
#include "slatelens/synth.hpp"
#include "support.hpp"

using namespace slatelens;
using testing::spit;
using testing::TempDir;

namespace {

void write_minimal(const TempDir& dir) {
  spit(dir / "submissions.jsonl", R"({"id": "s1", "abstract": "We study X. It works."})" "\n");
  spit(dir / "reviewers.jsonl",
       R"({"id": "alice", "organizations": ["MIT"], "country": "India", "h_index": 30, "coauthors": ["bob", "carol"], "abstracts": ["graphs and trees"]})"
       "\n"
       R"({"id": "bob", "organizations": []})"
       "\n");
  spit(dir / "assignments.jsonl",
       R"({"submission_id": "s1", "reviewer_id": "alice", "expertise": 0.7})"
       "\n"
       R"({"submission_id": "s1", "reviewer_id": "bob"})"
       "\n");
  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "s1", "reviewer_id": "alice", "summary": "Good. Clear.", "strengths": "", "weaknesses": "Slow.", "comments": "", "score": 6, "meta_rating": 4})"
       "\n"
       R"({"id": "r2", "submission_id": "s1", "reviewer_id": "bob", "summary": "Fine", "strengths": "", "weaknesses": "", "comments": ""})"
       "\n");
}

std::string error_of(const CorpusPaths& paths) {
  try {
    load_corpus(paths);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal corpus loads") {
  TempDir dir("corpus");
  write_minimal(dir);
  const auto c = load_corpus(CorpusPaths::in_directory(dir.path()));
  REQUIRE(c.submissions.size() == 1);
  REQUIRE(c.reviews.size() == 2);
  CHECK(c.submissions[0].abstract_sentences == std::vector<std::string>{"We study X.", "It works."});
  CHECK(c.reviews[0].sentences == std::vector<std::string>{"Good.", "Clear.", "Slow."});
  CHECK(c.reviews[0].score == 6);
  CHECK(c.reviews[0].meta_rating == 4);
  CHECK_FALSE(c.reviews[1].score.has_value());

  const auto& alice = c.reviewers[*c.find_reviewer("alice")];
  const auto& bob = c.reviewers[*c.find_reviewer("bob")];
  CHECK(alice.region_id == c.region_map.region_of("India"));
  CHECK(c.region_map.regions[static_cast<std::size_t>(*alice.region_id)] == "South Asia");
  CHECK(alice.h_index == 30);
  REQUIRE(alice.coauthor_ids.has_value());
  // bob is a reviewer, so the link points at bob's own person index.
  CHECK(std::count(alice.coauthor_ids->begin(), alice.coauthor_ids->end(), c.person_of(*c.find_reviewer("bob"))) == 1);
  CHECK(bob.organization_missing());
  CHECK_FALSE(bob.country.has_value());
  CHECK_FALSE(bob.region_id.has_value());
  CHECK_FALSE(bob.h_index.has_value());
  CHECK_FALSE(bob.coauthor_ids.has_value());
  CHECK_FALSE(bob.publication_abstracts.has_value());
  CHECK(c.expertise(0, *c.find_reviewer("alice")) == doctest::Approx(0.7));
  CHECK_FALSE(c.expertise(0, *c.find_reviewer("bob")).has_value());
}

TEST_CASE("dangling and duplicate references are rejected") {
  TempDir dir("corpus");
  write_minimal(dir);
  const auto paths = CorpusPaths::in_directory(dir.path());

  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "nope", "reviewer_id": "alice", "summary": "x", "strengths": "", "weaknesses": "", "comments": ""})"
       "\n");
  CHECK(error_of(paths).find("unknown submission nope") != std::string::npos);

  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "s1", "reviewer_id": "zed", "summary": "x", "strengths": "", "weaknesses": "", "comments": ""})"
       "\n");
  CHECK(error_of(paths).find("unknown reviewer zed") != std::string::npos);

  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "s1", "reviewer_id": "alice", "summary": "x", "strengths": "", "weaknesses": "", "comments": ""})"
       "\n"
       R"({"id": "r2", "submission_id": "s1", "reviewer_id": "alice", "summary": "y", "strengths": "", "weaknesses": "", "comments": ""})"
       "\n");
  CHECK(error_of(paths).find("duplicate review by alice") != std::string::npos);

  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "s1", "reviewer_id": "alice", "summary": "", "strengths": " ", "weaknesses": "", "comments": ""})"
       "\n");
  CHECK(error_of(paths).find("empty review") != std::string::npos);
}

TEST_CASE("schema violations carry file and line") {
  TempDir dir("corpus");
  write_minimal(dir);
  const auto paths = CorpusPaths::in_directory(dir.path());

  spit(dir / "reviewers.jsonl",
       R"({"id": "alice", "organizations": []})"
       "\n"
       R"({"id": "bob", "organizations": [], "h_index": "high"})"
       "\n");
  auto msg = error_of(paths);
  CHECK(msg.find("reviewers.jsonl:2") != std::string::npos);
  CHECK(msg.find("h_index") != std::string::npos);

  spit(dir / "reviewers.jsonl", R"({"organizations": []})" "\n");
  msg = error_of(paths);
  CHECK(msg.find("reviewers.jsonl:1") != std::string::npos);
  CHECK(msg.find("missing field 'id'") != std::string::npos);

  write_minimal(dir);
  spit(dir / "submissions.jsonl", "{not json\n");
  CHECK(error_of(paths).find("submissions.jsonl:1") != std::string::npos);

  write_minimal(dir);
  spit(dir / "reviews.jsonl",
       R"({"id": "r1", "submission_id": "s1", "reviewer_id": "alice", "summary": "x", "strengths": "", "weaknesses": "", "comments": "", "score": 11})"
       "\n");
  CHECK(error_of(paths).find("reviews.jsonl:1") != std::string::npos);
}

TEST_CASE("slate sizes outside 2..4 are rejected") {
  TempDir dir("corpus");
  write_minimal(dir);
  spit(dir / "assignments.jsonl", R"({"submission_id": "s1", "reviewer_id": "alice"})" "\n");
  spit(dir / "reviews.jsonl", "");
  CHECK(error_of(CorpusPaths::in_directory(dir.path())).find("expected 2 to 4") != std::string::npos);
}

TEST_CASE("synthetic corpus round-trips through the files") {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.n_submissions = 60;
  cfg.n_reviewers = 40;
  const auto out = generate_corpus(cfg);
  TempDir dir("roundtrip");
  write_corpus(out.corpus, dir.path());
  const auto back = load_corpus(CorpusPaths::in_directory(dir.path()));
  CHECK(back == out.corpus);

  TempDir again("roundtrip");
  write_corpus(back, again.path());
  for (const char* f : {"submissions.jsonl", "reviews.jsonl", "reviewers.jsonl", "assignments.jsonl", "regions.json"}) {
    CAPTURE(f);
    CHECK(testing::slurp(dir / f) == testing::slurp(again / f));
  }
}

TEST_CASE("anonymize: deterministic, injective, salt sensitive") {
  CHECK(pseudonym("person", "a@x.org", "salt") == pseudonym("person", "a@x.org", "salt"));
  CHECK(pseudonym("person", "a@x.org", "salt") != pseudonym("person", "b@x.org", "salt"));
  CHECK(pseudonym("person", "a@x.org", "salt") != pseudonym("person", "a@x.org", "pepper"));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::set<std::string> ids;
    while (ids.size() < 200) ids.insert("user" + std::to_string(rng.below(100000)) + "@example.org");
    std::set<std::string> names;
    for (const auto& id : ids) names.insert(pseudonym("person", id, "s" + std::to_string(trial)));
    CHECK(names.size() == ids.size());
  }
}

TEST_CASE("anonymize keeps co-authorship links and hides identifiers") {
  TempDir dir("anon");
  write_minimal(dir);
  const auto raw = parse_corpus(CorpusPaths::in_directory(dir.path()));
  const auto a1 = anonymize(raw, "k1");
  const auto a2 = anonymize(raw, "k1");
  const auto plain = build_corpus(raw);
  CHECK(a1 == a2);
  CHECK(a1.reviews.size() == plain.reviews.size());
  CHECK_FALSE(a1.find_reviewer("alice").has_value());
  const auto alice = a1.find_reviewer(pseudonym("person", "alice", "k1"));
  const auto bob = a1.find_reviewer(pseudonym("person", "bob", "k1"));
  REQUIRE(alice.has_value());
  REQUIRE(bob.has_value());
  const auto& co = *a1.reviewers[*alice].coauthor_ids;
  CHECK(std::count(co.begin(), co.end(), a1.person_of(*bob)) == 1);
  for (const auto& org : a1.organizations) CHECK(org != "MIT");
}
