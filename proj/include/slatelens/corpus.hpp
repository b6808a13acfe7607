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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace slatelens {

inline constexpr std::size_t kRegionCount = 12;

struct Submission {
  std::string id;
  std::vector<std::string> abstract_sentences;
  std::vector<std::size_t> reviewers;  // indices into ReviewCorpus::reviewers

  bool operator==(const Submission&) const = default;
};

struct ReviewDoc {
  std::string id;
  std::size_t submission = 0;
  std::size_t reviewer = 0;
  std::vector<std::string> sentences;
  std::optional<int> score;        // 1..10
  std::optional<int> meta_rating;  // 1..5

  bool operator==(const ReviewDoc&) const = default;
};

/// Absent optionals are missing profile fields; an empty organization list is
/// a missing affiliation. Nothing is imputed at this layer.
struct ReviewerRecord {
  std::string id;
  std::vector<int> organization_ids;  // sorted, unique; indices into organizations
  std::optional<std::string> country;
  std::optional<int> region_id;  // index into regions
  std::optional<int> h_index;
  std::optional<std::vector<int>> coauthor_ids;  // sorted, unique; indices into people
  std::optional<std::vector<std::string>> publication_abstracts;

  bool organization_missing() const noexcept { return organization_ids.empty(); }
  bool operator==(const ReviewerRecord&) const = default;
};

struct ExpertiseScore {
  std::size_t submission = 0;
  std::size_t reviewer = 0;
  std::optional<double> value;

  bool operator==(const ExpertiseScore&) const = default;
};

/// country (lowercased) -> region name, plus the ordered region vocabulary.
struct RegionMap {
  std::vector<std::string> regions;
  std::map<std::string, std::string> country_to_region;

  std::optional<int> region_of(std::string_view country) const;
  static RegionMap defaults();
  static RegionMap load(const std::filesystem::path& path);
  bool operator==(const RegionMap&) const = default;
};

/// Immutable after construction; safe to share read-only across threads.
class ReviewCorpus {
 public:
  std::vector<Submission> submissions;
  std::vector<ReviewDoc> reviews;
  std::vector<ReviewerRecord> reviewers;
  std::vector<ExpertiseScore> assignments;
  std::vector<std::string> organizations;  // organization vocabulary
  std::vector<std::string> people;         // reviewers first (same order), then external coauthors
  RegionMap region_map;

  std::optional<std::size_t> find_submission(std::string_view id) const;
  std::optional<std::size_t> find_reviewer(std::string_view id) const;
  /// Review written by `reviewer` for `submission`, if any.
  const ReviewDoc* review_for(std::size_t submission, std::size_t reviewer) const;
  std::optional<double> expertise(std::size_t submission, std::size_t reviewer) const;

  /// Person-vocabulary index of a reviewer (equal to its reviewer index).
  int person_of(std::size_t reviewer) const noexcept { return static_cast<int>(reviewer); }

  /// Rebuilds lookup tables; called by the builders after mutation.
  void reindex();

  bool operator==(const ReviewCorpus& other) const;

 private:
  std::unordered_map<std::string, std::size_t> submission_index_;
  std::unordered_map<std::string, std::size_t> reviewer_index_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> review_index_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> assignment_index_;
};

// JSONL-level records carrying the identifiers exactly as found in the files.
struct RawSubmission {
  std::string id;
  std::string abstract;
};

struct RawReview {
  std::string id;
  std::string submission_id;
  std::string reviewer_id;
  std::string summary;
  std::string strengths;
  std::string weaknesses;
  std::string comments;
  std::optional<int> score;
  std::optional<int> meta_rating;
};

struct RawReviewer {
  std::string id;
  std::vector<std::string> organizations;
  std::optional<std::string> country;
  std::optional<int> h_index;
  std::optional<std::vector<std::string>> coauthors;
  std::optional<std::vector<std::string>> abstracts;
};

struct RawAssignment {
  std::string submission_id;
  std::string reviewer_id;
  std::optional<double> expertise;
};

struct RawCorpus {
  std::vector<RawSubmission> submissions;
  std::vector<RawReview> reviews;
  std::vector<RawReviewer> reviewers;
  std::vector<RawAssignment> assignments;
  RegionMap region_map = RegionMap::defaults();
};

struct CorpusPaths {
  std::filesystem::path submissions;
  std::filesystem::path reviews;
  std::filesystem::path reviewers;
  std::filesystem::path assignments;
  std::optional<std::filesystem::path> regions;

  /// Standard file names inside `dir`; regions.json is used when present.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

/// Parses and schema-checks the JSONL files. Errors carry file:line.
RawCorpus parse_corpus(const CorpusPaths& paths);

/// Validates referential integrity and builds the indexed corpus. Identifiers
/// are kept verbatim.
ReviewCorpus build_corpus(const RawCorpus& raw);

ReviewCorpus load_corpus(const CorpusPaths& paths);

/// Replaces reviewer ids, coauthor names and organization names by keyed-hash
/// pseudonyms (HMAC-SHA256 under `salt`) and builds the corpus. Reviewer ids
/// and coauthor names share one pseudonym space so co-authorship links
/// survive. Throws DataError when two distinct identifiers collide.
ReviewCorpus anonymize(const RawCorpus& raw, std::string_view salt);

/// Pseudonym for a single identifier in the given domain ("person", "org").
std::string pseudonym(std::string_view domain, std::string_view identifier, std::string_view salt);

/// Writes the four JSONL files and regions.json. Text is written one sentence
/// per line so that load_corpus reproduces the same segmentation.
void write_corpus(const ReviewCorpus& corpus, const std::filesystem::path& dir);

}  // namespace slatelens
