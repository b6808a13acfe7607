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

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "slatelens/corpus.hpp"
#include "slatelens/diversity.hpp"
#include "slatelens/measures.hpp"
#include "slatelens/pair_measures.hpp"
#include "slatelens/stats.hpp"

namespace slatelens {

enum class TriplePolicy { one_per_submission, all };
enum class Method { parametric, nonparametric };

std::string_view to_string(TriplePolicy p) noexcept;
std::optional<TriplePolicy> parse_triple_policy(std::string_view s) noexcept;
std::string_view to_string(Method m) noexcept;
std::optional<Method> parse_method(std::string_view s) noexcept;

/// Normalized outcome values keyed by unordered reviewer pair.
class OutcomeTable {
 public:
  OutcomeTable() = default;
  OutcomeTable(std::vector<PairKey> keys, std::vector<MeasureValues> values);

  std::optional<std::size_t> find(std::size_t submission, std::size_t r1, std::size_t r2) const;
  double value(std::size_t submission, std::size_t r1, std::size_t r2, Measure m) const;
  const std::vector<PairKey>& keys() const noexcept { return keys_; }
  const std::vector<MeasureValues>& values() const noexcept { return values_; }

 private:
  std::vector<PairKey> keys_;
  std::vector<MeasureValues> values_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> index_;
};

struct SlateTriple {
  std::size_t submission = 0;
  std::size_t anchor = 0;
  std::size_t diverse = 0;      // delta(anchor, diverse) = +1
  std::size_t non_diverse = 0;  // delta(anchor, non_diverse) = -1
  bool operator==(const SlateTriple&) const = default;
};

/// Anchored triples among reviewers who all wrote reviews. With
/// one_per_submission the triple with the smallest (anchor, diverse,
/// non_diverse) reviewer ids is kept.
std::vector<SlateTriple> build_triples(const ReviewCorpus& corpus, const TreatmentTable& table, Dimension d,
                                       TriplePolicy policy);

/// Dense layout of a reviewer profile: organizations (multi-hot), regions
/// (one-hot), seniority (one-hot), topics (mixture). Missing fields are zero.
/// The co-author vector is not part of it.
struct ProfileEncoding {
  std::size_t organizations = 0;
  std::size_t regions = kRegionCount;
  std::size_t topics = 0;

  std::size_t size() const noexcept { return organizations + regions + 2 + topics; }
  std::vector<std::string> names(const ReviewCorpus& corpus) const;
  void encode(const ProfileVectors& p, Eigen::Ref<Eigen::VectorXd> out) const;
};

ProfileEncoding profile_encoding(const ReviewCorpus& corpus, const TreatmentTable& table);

/// Greedy selection of columns, in order, that are linearly independent of
/// the columns already selected (relative residual above `tolerance`).
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x, double tolerance = 1e-8);

/// Design of the differenced regression: intercept, non-target treatment
/// differences, partner profile differences, partner expertise difference.
struct DifferenceDesign {
  Dimension dimension = Dimension::organization;
  std::vector<SlateTriple> triples;  // rows, after dropping missing expertise
  std::size_t dropped_missing_expertise = 0;
  Eigen::MatrixXd x;
  std::vector<std::string> columns;
  std::vector<std::string> pruned_zero;
  std::vector<std::string> aliased;
};

DifferenceDesign build_difference_design(const ReviewCorpus& corpus, const TreatmentTable& table,
                                         const std::vector<SlateTriple>& triples, Dimension d);

/// y(anchor, diverse) - y(anchor, non_diverse) per design row.
Eigen::VectorXd difference_outcomes(const DifferenceDesign& design, const OutcomeTable& outcomes, Measure m);

struct EffectEstimate {
  Dimension dimension = Dimension::organization;
  Measure outcome = Measure::argument_coverage;
  Method method = Method::parametric;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double p_adj = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  bool significant = false;
  std::string error;  // non-empty when the cell failed

  bool ok() const noexcept { return error.empty(); }
};

struct ParametricOptions {
  std::size_t min_triples = 30;
  std::size_t min_residual_dof = 10;  // triples minus design columns
  std::optional<Eigen::VectorXd> weights;  // unit weights when absent
};

struct ParametricResult {
  EffectEstimate estimate;
  stats::RegressionFit fit;
};

/// Weighted least squares on the difference design; gamma is the intercept.
/// Throws EstimationError below the sample floor or on a singular design.
ParametricResult estimate_parametric(const DifferenceDesign& design, const OutcomeTable& outcomes, Measure m,
                                     const ParametricOptions& options = {});

struct PropensityRow {
  std::size_t submission = 0;
  std::size_t anchor = 0;
  std::size_t partner = 0;
  int delta = 0;
  double score = 0.0;
};

struct PropensityModel {
  Dimension dimension = Dimension::organization;
  std::vector<PropensityRow> rows;
  std::vector<std::string> columns;
  stats::LogisticFit fit;
  std::size_t dropped_missing_expertise = 0;
};

/// Logistic model of P(delta = +1) for every (anchor, partner) arm of an
/// anchored triple, from the partner's profile and expertise and the
/// non-target treatments of the pair.
PropensityModel fit_propensity(const ReviewCorpus& corpus, const TreatmentTable& table, Dimension d, double l2);

struct Match {
  std::size_t submission = 0;
  std::size_t anchor = 0;
  std::size_t diverse = 0;
  std::size_t non_diverse = 0;
  double p_diverse = 0.0;
  double p_non_diverse = 0.0;
};

/// Within each submission, 1:1 greedy matching of diverse and non-diverse
/// arms sharing an anchor, by ascending propensity gap, gap < caliper. A
/// reviewer pair serves in at most one match.
std::vector<Match> propensity_match(const PropensityModel& model, const ReviewCorpus& corpus, double caliper);

/// Lists every caliper, arm-sign or same-submission violation.
std::vector<std::string> audit_matches(const std::vector<Match>& matches, const ReviewCorpus& corpus,
                                       const TreatmentTable& table, Dimension d, double caliper);

/// gamma* = mean of y(diverse arm) - y(non-diverse arm); p from the sign-flip
/// permutation test.
EffectEstimate estimate_nonparametric(const std::vector<Match>& matches, const OutcomeTable& outcomes, Measure m,
                                      Dimension d, std::int64_t permutations, std::uint64_t seed,
                                      bool parallel = true);

struct QualityCheck {
  Dimension dimension = Dimension::organization;
  std::size_t slates = 0;
  std::optional<stats::Correlation> correlation;
  std::string error;
};

/// Pearson correlation, over slates with meta ratings, between the slate's
/// mean treatment value and the mean meta rating of its reviews.
std::vector<QualityCheck> quality_correlation_check(const ReviewCorpus& corpus, const TreatmentTable& table);

struct EffectMatrixOptions {
  std::vector<Dimension> dimensions{kAllDimensions.begin(), kAllDimensions.end()};
  std::vector<Measure> outcomes{kAllMeasures.begin(), kAllMeasures.end()};
  bool parametric = true;
  bool nonparametric = true;
  TriplePolicy policy = TriplePolicy::one_per_submission;
  std::size_t min_triples = 30;
  std::size_t min_residual_dof = 10;
  double caliper = 0.1;
  double l2 = 1e-4;
  std::int64_t permutations = 10000;
  double fdr = 0.05;
  double significance = 0.01;
  std::uint64_t seed = 1;
  bool parallel = true;
};

struct DimensionDiagnostics {
  Dimension dimension = Dimension::organization;
  std::size_t triples = 0;
  std::size_t dropped_missing_expertise = 0;
  std::vector<std::string> pruned_zero;
  std::vector<std::string> aliased;
  std::size_t propensity_rows = 0;
  std::size_t matches = 0;
  std::vector<std::string> errors;
};

struct EffectMatrix {
  std::vector<EffectEstimate> cells;  // method, then dimension, then outcome
  std::vector<DimensionDiagnostics> diagnostics;
};

/// Benjamini-Hochberg over the successful cells of each method; a cell is
/// significant when its adjusted p is at most `significance`.
void apply_bh(std::vector<EffectEstimate>& cells, double fdr, double significance);

/// Every (dimension, outcome) cell for the requested methods. Cells run in
/// parallel when options.parallel is set; a failing cell records its error
/// and the rest are still estimated.
EffectMatrix run_effect_matrix(const ReviewCorpus& corpus, const TreatmentTable& table, const OutcomeTable& outcomes,
                               const EffectMatrixOptions& options);

/// Seed used for the permutation test of one cell.
std::uint64_t cell_seed(std::uint64_t seed, Dimension d, Measure m) noexcept;

}  // namespace slatelens
