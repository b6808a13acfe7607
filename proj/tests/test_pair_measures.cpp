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

#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "support.hpp"
#include "slatelens/error.hpp"
#include "slatelens/pair_measures.hpp"
#include "slatelens/synth.hpp"

using namespace slatelens;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

SynthOutput small_corpus(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.n_submissions = 80;
  c.n_reviewers = 60;
  return generate_corpus(c);
}

}  // namespace

TEST_CASE("one pair, every measure, against the brute-force definitions") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_doc(rng, 12, 8, 6);
    const auto b = oracle::random_doc(rng, 12, 8, 6);
    const auto s = oracle::random_doc(rng, 12, 8, 5);
    const auto v = measure_pair(testing::to_doc(a, "a"), testing::to_doc(b, "b"), testing::to_doc(s, "s"),
                                a.sentences, b.sentences, s.sentences);
    auto at = [&](Measure m) { return v[index_of(m)]; };
    CHECK(at(Measure::argument_coverage) == doctest::Approx(oracle::type_coverage(a.arguments, b.arguments)));
    CHECK(at(Measure::aspect_coverage) == doctest::Approx(oracle::type_coverage(a.aspects, b.aspects)));
    CHECK(at(Measure::lexical_coverage) == doctest::Approx(oracle::lexical_coverage(a.sentences, b.sentences, s.sentences)));
    CHECK(at(Measure::lexical_redundancy) == doctest::Approx(oracle::lexical_redundancy(a.sentences, b.sentences)));
    CHECK(at(Measure::semantic_coverage) ==
          doctest::Approx(oracle::semantic_coverage(a.embeddings, b.embeddings, s.embeddings)));
    CHECK(at(Measure::semantic_redundancy) == doctest::Approx(oracle::semantic_redundancy(a.embeddings, b.embeddings)));
    CHECK(at(Measure::weighted_redundancy_argument) ==
          doctest::Approx(oracle::weighted_redundancy(a.embeddings, b.embeddings, a.arguments, b.arguments)));
    CHECK(at(Measure::weighted_redundancy_aspect) ==
          doctest::Approx(oracle::weighted_redundancy(a.embeddings, b.embeddings, a.aspects, b.aspects)));

    const auto w = measure_pair(testing::to_doc(b, "b"), testing::to_doc(a, "a"), testing::to_doc(s, "s"),
                                b.sentences, a.sentences, s.sentences);
    for (auto m : kAllMeasures) CHECK(w[index_of(m)] == v[index_of(m)]);
  }
}

TEST_CASE("measures not asked for stay NaN") {
  Rng rng(32);
  const auto a = oracle::random_doc(rng, 8, 6, 4);
  const auto b = oracle::random_doc(rng, 8, 6, 4);
  const auto s = oracle::random_doc(rng, 8, 6, 4);
  const std::vector<Measure> some{Measure::semantic_redundancy, Measure::aspect_coverage};
  const auto v = measure_pair(testing::to_doc(a), testing::to_doc(b), testing::to_doc(s), a.sentences, b.sentences,
                              s.sentences, measure_set(some));
  for (auto m : kAllMeasures) {
    const bool wanted = m == Measure::semantic_redundancy || m == Measure::aspect_coverage;
    CHECK(std::isnan(v[index_of(m)]) != wanted);
  }
}

TEST_CASE("corpus table: parallel equals serial, keys cover reviewed pairs") {
  const auto out = small_corpus(3);
  const FallbackSource source;
  const auto par = compute_pair_measures(out.corpus, source);
  const auto ser = compute_pair_measures_serial(out.corpus, source);
  REQUIRE(par.keys.size() == ser.keys.size());
  for (std::size_t i = 0; i < par.keys.size(); ++i) {
    CHECK(par.keys[i] == ser.keys[i]);
    for (auto m : kAllMeasures) CHECK(same(par.values[i][index_of(m)], ser.values[i][index_of(m)]));
  }
  std::size_t expected = 0;
  for (std::size_t s = 0; s < out.corpus.submissions.size(); ++s) {
    const auto& slate = out.corpus.submissions[s].reviewers;
    for (std::size_t i = 0; i < slate.size(); ++i) {
      for (std::size_t j = i + 1; j < slate.size(); ++j) {
        expected += out.corpus.review_for(s, slate[i]) && out.corpus.review_for(s, slate[j]) ? 1 : 0;
      }
    }
  }
  CHECK(par.keys.size() == expected);
  const std::vector<Measure> one{Measure::lexical_redundancy};
  const auto sub = compute_pair_measures(out.corpus, source, measure_set(one));
  for (std::size_t i = 0; i < sub.keys.size(); ++i) {
    CHECK(sub.values[i][index_of(Measure::lexical_redundancy)] == par.values[i][index_of(Measure::lexical_redundancy)]);
    CHECK(std::isnan(sub.values[i][index_of(Measure::semantic_redundancy)]));
  }
}

TEST_CASE("sidecar files: sentences out, annotations in") {
  testing::TempDir dir("sidecar");
  const auto out = small_corpus(4);
  const auto records = sentence_records(out.corpus);
  write_sentences(records, dir / "sentences.jsonl");
  std::size_t lines = 0;
  {
    std::ifstream in(dir / "sentences.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      const auto& r = records[lines++];
      CHECK(j.at("doc_id") == r.doc_id);
      CHECK(j.at("sentence_index") == r.sentence_index);
      CHECK(j.at("text") == r.text);
    }
  }
  CHECK(lines == records.size());
  REQUIRE_FALSE(records.empty());
  CHECK(records.front().doc_id == "abstract/" + out.corpus.submissions.front().id);

  // Stand in for the sidecar: annotate with the fallback and read it back.
  const FallbackSource fallback;
  write_annotations(annotate_corpus(out.corpus, fallback), dir / "annotations.jsonl");
  const auto bundle = std::make_shared<const AnnotationBundle>(read_annotations(dir / "annotations.jsonl"));
  const BundleSource sidecar(bundle);
  CHECK(sidecar.model() == FallbackAnnotator::model_name());
  const auto a = compute_pair_measures(out.corpus, fallback);
  const auto b = compute_pair_measures(out.corpus, sidecar);
  REQUIRE(a.keys.size() == b.keys.size());
  for (std::size_t i = 0; i < a.keys.size(); ++i) {
    for (auto m : kAllMeasures) CHECK(a.values[i][index_of(m)] == doctest::Approx(b.values[i][index_of(m)]).epsilon(1e-12));
  }

  const auto& first = out.corpus.reviews.front();
  CHECK_THROWS_AS(sidecar.get("no-such-doc", {"x"}), DataError);
  auto shorter = first.sentences;
  shorter.pop_back();
  CHECK_THROWS_AS(sidecar.get(first.id, shorter), DataError);
}
