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

// Planted-effect experiments on generated corpora, with outcomes read from
// the generator's latent channels. Slow.

#include <doctest.h>

#include <algorithm>
#include <iostream>

#include "support.hpp"
#include "slatelens/causal.hpp"
#include "slatelens/synth.hpp"

using namespace slatelens;

TEST_CASE("planted coauthorship effect on redundancy") {
  int sign_agrees = 0;
  int only_planted = 0;
  for (int s = 0; s < 100; ++s) {
    SynthConfig c;
    c.seed = 500 + static_cast<std::uint64_t>(s);
    c.n_submissions = 1800;
    SynthGenerator g(c);
    g.plant_effect(Dimension::coauthorship, Measure::semantic_redundancy, -0.05);
    const auto out = g.generate();
    const auto table = compute_treatments(out.corpus, testing::no_topics(out.corpus), {});
    const auto outcomes = testing::latent_outcomes(out);

    auto matches = propensity_match(fit_propensity(out.corpus, table, Dimension::coauthorship, 1e-4), out.corpus, 0.1);
    REQUIRE(matches.size() >= 200);
    matches.resize(std::min<std::size_t>(matches.size(), 300));
    const auto e = estimate_nonparametric(matches, outcomes, Measure::semantic_redundancy, Dimension::coauthorship, 200, 1);
    sign_agrees += e.gamma < 0.0 ? 1 : 0;

    if (s < 50) {
      EffectMatrixOptions o;
      o.permutations = 2000;
      o.seed = static_cast<std::uint64_t>(s) + 1;
      // No topic vectors here, so the topical row cannot be estimated.
      o.dimensions = {Dimension::organization, Dimension::geographical, Dimension::seniority, Dimension::coauthorship};
      const auto em = run_effect_matrix(out.corpus, table, outcomes, o);
      bool clean = true;
      for (const auto& cell : em.cells) {
        const bool planted = cell.dimension == Dimension::coauthorship && is_redundancy(cell.outcome);
        clean = clean && cell.significant == planted;
      }
      only_planted += clean ? 1 : 0;
    }
  }
  MESSAGE("sign agreement " << sign_agrees << "/100, clean matrices " << only_planted << "/50");
  CHECK(sign_agrees >= 95);
  CHECK(only_planted >= 45);
}
