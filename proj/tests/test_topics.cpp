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

#include "lda_synth.hpp"
#include "support.hpp"
#include "slatelens/corpus.hpp"
#include "slatelens/error.hpp"
#include "slatelens/topics.hpp"

using namespace slatelens;

namespace {

LdaOptions quick(std::uint64_t seed = 1) {
  LdaOptions o;
  o.iterations = 300;
  o.burn_in = 200;
  o.samples = 5;
  o.sample_spacing = 20;
  o.seed = seed;
  return o;
}

TopicModel hand_model(std::vector<std::string> vocab, Eigen::MatrixXd topic_word) {
  TopicModel m;
  m.k = static_cast<int>(topic_word.rows());
  m.alpha = 1.0;
  m.beta = 0.01;
  m.vocabulary = std::move(vocab);
  m.topic_word = std::move(topic_word);
  m.reindex();
  return m;
}

void check_rows(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    CHECK(m.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.row(r).minCoeff() >= 0.0);
  }
}

}  // namespace

TEST_CASE("corpus preparation drops stop words and rare tokens") {
  const auto tc = prepare_topic_corpus({{"the", "graph", "graph", "kernel"}, {"graph", "the"}, {"the"}},
                                       {"the"}, 2);
  CHECK(tc.vocabulary == std::vector<std::string>{"graph"});
  REQUIRE(tc.docs.size() == 3);
  CHECK(tc.docs[0] == std::vector<int>{0, 0});
  CHECK(tc.docs[1] == std::vector<int>{0});
  CHECK(tc.docs[2].empty());
}

TEST_CASE("single-word vocabulary forces every topic row") {
  TopicCorpus tc;
  tc.vocabulary = {"w"};
  tc.docs = {{0, 0, 0}, {0}, {0, 0}, {0}, {0, 0}, {0}, {0}, {0, 0, 0, 0}};
  for (int k : {2, 3, 7}) {
    const auto m = fit_lda(tc, k, quick());
    REQUIRE(m.topic_word.rows() == k);
    REQUIRE(m.topic_word.cols() == 1);
    for (int t = 0; t < k; ++t) CHECK(m.topic_word(t, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fitting is deterministic given the seed") {
  const auto p = testing::planted_topics(21, 120, 40);
  const auto tc = prepare_topic_corpus(p.docs, {}, 1);
  const auto a = fit_lda(tc, 3, quick(4));
  const auto b = fit_lda(tc, 3, quick(4));
  CHECK(a.topic_word == b.topic_word);
  CHECK(a.log_likelihood == b.log_likelihood);
  const auto c = fit_lda(tc, 3, quick(5));
  CHECK(c.topic_word != a.topic_word);
}

TEST_CASE("planted topics are recovered") {
  const auto p = testing::planted_topics(100);
  const auto tc = prepare_topic_corpus(p.docs, {}, 1);
  const auto m = fit_lda(tc, 3, quick());
  check_rows(m.topic_word);
  CHECK(testing::matched_tv(m, p) < 0.15);

  // Sampler log-likelihood climbs out of the random start.
  REQUIRE(m.log_likelihood.size() >= 2);
  CHECK(m.log_likelihood.back().second > m.log_likelihood.front().second);

  // A document made of one topic's leading words lands on that topic.
  int topic2 = 0;
  double best = -1.0;
  for (int t = 0; t < 3; ++t) {
    double mass = 0.0;
    for (int j = 30; j < 45; ++j) mass += m.topic_word(t, *m.word_id(p.words[static_cast<std::size_t>(j)]));
    if (mass > best) {
      best = mass;
      topic2 = t;
    }
  }
  std::vector<std::string> doc;
  for (int rep = 0; rep < 4; ++rep) {
    for (int j = 30; j < 36; ++j) doc.push_back(p.words[static_cast<std::size_t>(j)]);
  }
  const auto inf = infer_topics(m, doc, 3);
  CHECK_FALSE(inf.out_of_vocabulary);
  CHECK(inf.mixture.sum() == doctest::Approx(1.0));
  Eigen::Index arg = 0;
  inf.mixture.maxCoeff(&arg);
  CHECK(arg == topic2);
}

TEST_CASE("out-of-vocabulary documents get a uniform mixture") {
  const auto m = hand_model({"a", "b"}, (Eigen::MatrixXd(2, 2) << 0.9, 0.1, 0.2, 0.8).finished());
  const auto inf = infer_topics(m, {"zzz", "yyy"}, 1);
  CHECK(inf.out_of_vocabulary);
  CHECK(inf.mixture[0] == 0.5);
  CHECK(inf.mixture[1] == 0.5);
}

TEST_CASE("coherence hand values") {
  // docs: {a b} {a c} {a b c} {d}
  TopicCorpus tc;
  tc.vocabulary = {"a", "b", "c", "d"};
  tc.docs = {{0, 1}, {0, 2}, {0, 1, 2}, {3}};
  Eigen::MatrixXd tw(2, 4);
  tw << 0.5, 0.3, 0.15, 0.05,  // top: a, b, c
      0.05, 0.15, 0.3, 0.5;    // top: d, c, b
  const auto m = hand_model(tc.vocabulary, tw);
  const auto c = topic_coherences(m, tc, 3);
  // D(a)=3 D(b)=2 D(c)=2 D(d)=1; D(a,b)=2 D(a,c)=2 D(b,c)=1
  const double t0 = std::log(3.0 / 3) + std::log(3.0 / 3) + std::log(2.0 / 2);
  const double t1 = std::log(1.0 / 1) + std::log(1.0 / 1) + std::log(2.0 / 2);
  CHECK(c[0] == doctest::Approx(t0));
  CHECK(c[1] == doctest::Approx(t1));
  CHECK(topic_coherence(m, tc, 3) == doctest::Approx((t0 + t1) / 2));
  CHECK(top_words(m, 0, 3) == std::vector<int>{0, 1, 2});
  CHECK(top_words(m, 1, 3) == std::vector<int>{3, 2, 1});
  CHECK_THROWS_AS(topic_coherences(m, tc, 1), ConfigError);
}

TEST_CASE("coherence: identical top words score alike, co-occurring words score highest") {
  TopicCorpus tc;
  tc.vocabulary = {"a", "b", "c", "d", "e"};
  tc.docs = {{0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2}, {3, 4}, {4}};
  Eigen::MatrixXd tw(3, 5);
  tw << 0.4, 0.3, 0.2, 0.05, 0.05,  //
      0.3, 0.4, 0.2, 0.05, 0.05,    //
      0.4, 0.05, 0.05, 0.2, 0.3;
  const auto m = hand_model(tc.vocabulary, tw);
  const auto c = topic_coherences(m, tc, 3);
  CHECK(c[0] == doctest::Approx(c[1]));
  // a, b, c always appear together: every pair term is log((3 + 1) / 3).
  CHECK(c[0] == doctest::Approx(3 * std::log(4.0 / 3.0)));
  CHECK(c[2] < c[0]);
}

TEST_CASE("topic-count selection") {
  const auto p = testing::planted_topics(101);
  const auto tc = prepare_topic_corpus(p.docs, {}, 1);
  const auto one = select_topic_count(tc, {3}, quick(), 10);
  CHECK(one.k == 3);
  CHECK(one.coherence.size() == 1);
  const auto grid = select_topic_count(tc, {5, 2, 3}, quick(), 10);
  CHECK(grid.k == 3);
  CHECK(grid.coherence.size() == 3);
  CHECK(grid.model.k == 3);
  CHECK_THROWS_AS(select_topic_count(tc, {}, quick(), 10), ConfigError);
}

TEST_CASE("topic-count ties go to the smaller K") {
  // Every word in every document: all coherences are equal.
  TopicCorpus tc;
  tc.vocabulary = {"a", "b", "c", "d", "e", "f"};
  for (int d = 0; d < 30; ++d) tc.docs.push_back({0, 1, 2, 3, 4, 5, d % 6});
  const auto sel = select_topic_count(tc, {6, 4}, quick(), 4);
  CHECK(sel.coherence.at(4) == sel.coherence.at(6));
  CHECK(sel.k == 4);
}

TEST_CASE("topic model file round trip") {
  testing::TempDir dir("topics");
  const auto p = testing::planted_topics(22, 60, 30);
  const auto m = fit_lda(prepare_topic_corpus(p.docs, {}, 1), 3, quick());
  write_topic_model(m, dir / "topic_model.json");
  const auto back = read_topic_model(dir / "topic_model.json");
  CHECK(back.k == m.k);
  CHECK(back.vocabulary == m.vocabulary);
  CHECK(back.seed == m.seed);
  CHECK((back.topic_word - m.topic_word).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.word_id(m.vocabulary[2]) == 2);
}

TEST_CASE("reviewer topic vectors") {
  ReviewCorpus corpus;
  const auto p = testing::planted_topics(23, 90, 40);
  for (int r = 0; r < 4; ++r) {
    ReviewerRecord rec;
    rec.id = "r" + std::to_string(r);
    if (r < 3) {
      std::vector<std::string> abstracts;
      for (int d = r * 30; d < r * 30 + 30; ++d) {
        std::string s;
        for (const auto& w : p.docs[static_cast<std::size_t>(d)]) s += w + " ";
        abstracts.push_back(s);
      }
      rec.publication_abstracts = abstracts;
    } else {
      rec.publication_abstracts = std::vector<std::string>{};
    }
    corpus.reviewers.push_back(rec);
  }
  corpus.reindex();
  ReviewerTopicOptions opt;
  opt.k_grid = {3};
  opt.lda = quick();
  const auto rt = reviewer_topics(corpus, opt);
  REQUIRE(rt.selection);
  for (int r = 0; r < 3; ++r) {
    REQUIRE(rt.vectors[static_cast<std::size_t>(r)]);
    CHECK(rt.vectors[static_cast<std::size_t>(r)]->sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rt.vectors[static_cast<std::size_t>(r)]->minCoeff() >= 0.0);
  }
  CHECK_FALSE(rt.vectors[3]);

  for (auto& rec : corpus.reviewers) rec.publication_abstracts.reset();
  const auto none = reviewer_topics(corpus, opt);
  CHECK_FALSE(none.selection);
  CHECK(none.vectors.size() == 4);
}
