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

// OpenMP kernels against their single-threaded references.

#include <benchmark/benchmark.h>

#include <vector>

#include "slatelens/causal.hpp"
#include "slatelens/pair_measures.hpp"
#include "slatelens/rng.hpp"
#include "slatelens/stats.hpp"
#include "slatelens/synth.hpp"

using namespace slatelens;

namespace {

const SynthOutput& corpus() {
  static const SynthOutput out = [] {
    SynthConfig c;
    c.seed = 4;
    c.n_submissions = 300;
    c.n_reviewers = 200;
    return generate_corpus(c);
  }();
  return out;
}

std::vector<double> diffs(std::size_t n) {
  Rng rng(9);
  std::vector<double> d(n);
  for (auto& x : d) x = rng.normal() + 0.05;
  return d;
}

OutcomeTable latent_outcomes(const SynthOutput& out) {
  std::vector<PairKey> keys;
  std::vector<MeasureValues> values;
  for (const auto& l : out.latents) {
    keys.push_back({l.submission, l.first, l.second});
    MeasureValues v{};
    for (auto m : kAllMeasures) v[index_of(m)] = l.latent[static_cast<std::size_t>(channel_of(m))];
    values.push_back(v);
  }
  return {std::move(keys), std::move(values)};
}

void BM_PairMeasures(benchmark::State& state) {
  const FallbackSource source;
  for (auto _ : state) benchmark::DoNotOptimize(compute_pair_measures(corpus().corpus, source));
}

void BM_PairMeasuresSerial(benchmark::State& state) {
  const FallbackSource source;
  for (auto _ : state) benchmark::DoNotOptimize(compute_pair_measures_serial(corpus().corpus, source));
}

void BM_Permutation(benchmark::State& state) {
  const auto d = diffs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::permutation_test_paired(d, 10000, 1, stats::PermutationMode::sampled));
  }
}

void BM_PermutationSerial(benchmark::State& state) {
  const auto d = diffs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::permutation_test_paired_serial(d, 10000, 1, stats::PermutationMode::sampled));
  }
}

void effect_matrix(benchmark::State& state, bool parallel) {
  const auto& out = corpus();
  const auto table = compute_treatments(out.corpus, std::vector<std::optional<Eigen::VectorXd>>(out.corpus.reviewers.size()), {});
  const auto outcomes = latent_outcomes(out);
  EffectMatrixOptions o;
  o.dimensions = {Dimension::organization, Dimension::geographical, Dimension::seniority, Dimension::coauthorship};
  o.permutations = 2000;
  o.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(run_effect_matrix(out.corpus, table, outcomes, o));
}

void BM_EffectMatrix(benchmark::State& state) { effect_matrix(state, true); }
void BM_EffectMatrixSerial(benchmark::State& state) { effect_matrix(state, false); }

}  // namespace

BENCHMARK(BM_PairMeasures)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairMeasuresSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Permutation)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationSerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectMatrix)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectMatrixSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
