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

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slatelens/corpus.hpp"

namespace slatelens {

enum class Dimension : std::size_t { organization, geographical, seniority, topical, coauthorship };

inline constexpr std::size_t kDimensionCount = 5;
inline constexpr std::array<Dimension, kDimensionCount> kAllDimensions = {
    Dimension::organization, Dimension::geographical, Dimension::seniority, Dimension::topical,
    Dimension::coauthorship};

constexpr std::size_t index_of(Dimension d) noexcept { return static_cast<std::size_t>(d); }
std::string_view to_string(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view name) noexcept;

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Optional pins for the corpus-derived thresholds.
struct Thresholds {
  std::optional<double> h_index;
  std::optional<double> topical_similarity;
};

Thresholds read_thresholds(const std::filesystem::path& path);

struct ResolvedThresholds {
  double h_index = 22.0;  // senior iff h > h_index
  double topical_similarity = 0.6472;  // non-diverse iff similarity >= this
  bool h_index_from_corpus = false;
  bool topical_from_corpus = false;
};

/// Profile of one reviewer. Multi-hot and one-hot vectors are kept as index
/// sets; absent optionals (or an empty organization list) mark missing fields.
struct ProfileVectors {
  int person = -1;                 // own index in the person vocabulary
  std::vector<int> organizations;  // sorted
  std::optional<int> region;
  std::optional<int> seniority;  // 1 senior, 0 not
  std::optional<std::vector<int>> coauthors;  // sorted, excluding `person`
  std::optional<Eigen::VectorXd> topics;

  bool missing(Dimension d) const noexcept;
};

ProfileVectors build_profile_vectors(const ReviewerRecord& record, int person, double h_threshold,
                                     const std::optional<Eigen::VectorXd>& topics);

/// Dot product of two topic mixtures. Throws DataError on length mismatch.
double topical_similarity(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2);

/// 0 for the same person, 1 for direct co-authors, 2 for a shared co-author,
/// kUnreachable otherwise; nullopt when either co-author list is missing.
std::optional<int> coauthor_distance(const ProfileVectors& p1, const ProfileVectors& p2);

/// -1 non-diverse, +1 diverse, 0 when a field the dimension needs is missing.
int pair_diversity(const ProfileVectors& p1, const ProfileVectors& p2, Dimension d,
                   const ResolvedThresholds& thresholds);

struct PairTreatment {
  std::size_t submission = 0;
  std::size_t first = 0;   // reviewer indices, in slate order
  std::size_t second = 0;
  std::array<int, kDimensionCount> delta{};
  std::optional<double> similarity;
  std::optional<int> distance;
};

/// Treatments of every co-assigned reviewer pair, plus the profiles and
/// thresholds they were computed with.
class TreatmentTable {
 public:
  ResolvedThresholds thresholds;
  std::vector<ProfileVectors> profiles;  // by reviewer index
  std::vector<PairTreatment> pairs;      // submission order, then slate order

  /// Index into `pairs` for an unordered reviewer pair of a submission.
  std::optional<std::size_t> find(std::size_t submission, std::size_t r1, std::size_t r2) const;
  int delta(std::size_t submission, std::size_t r1, std::size_t r2, Dimension d) const;
  void reindex();

 private:
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> index_;
};

/// Median over reviewers with an h-index.
std::optional<double> median_h_index(const ReviewCorpus& corpus);

/// Median topical similarity over distinct co-assigned reviewer pairs that
/// both have topic vectors.
std::optional<double> median_topical_similarity(const ReviewCorpus& corpus,
                                                const std::vector<std::optional<Eigen::VectorXd>>& topics);

/// Resolves thresholds (overrides first, corpus medians otherwise), builds
/// profiles and evaluates every pair. `topics` is indexed by reviewer.
TreatmentTable compute_treatments(const ReviewCorpus& corpus,
                                  const std::vector<std::optional<Eigen::VectorXd>>& topics,
                                  const Thresholds& overrides);

}  // namespace slatelens
