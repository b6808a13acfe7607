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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace slatelens {

inline constexpr std::size_t kEmbeddingDim = 768;
inline constexpr std::size_t kAspectCount = 8;
inline constexpr std::size_t kArgumentCount = 5;

inline constexpr std::array<std::string_view, kAspectCount> kAspectNames = {
    "Summary",   "Motivation/Impact", "Originality",           "Soundness/Correctness",
    "Substance", "Replicability",     "Meaningful Comparison", "Clarity"};
inline constexpr std::array<std::string_view, kArgumentCount> kArgumentNames = {
    "Evaluation", "Fact", "Request", "Reference", "Quote"};

enum class TypeChannel { aspect, argument };

std::size_t type_count(TypeChannel channel) noexcept;
std::string_view to_string(TypeChannel channel) noexcept;

/// Per-sentence annotations of one document: row i of every matrix belongs to
/// sentence i. Embeddings are unit-norm rows.
struct AnnotatedDoc {
  std::string doc_id;
  Eigen::MatrixXd embeddings;
  Eigen::MatrixXd aspect_probs;
  Eigen::MatrixXd argument_probs;

  std::size_t size() const noexcept { return static_cast<std::size_t>(embeddings.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(embeddings.cols()); }
  const Eigen::MatrixXd& types(TypeChannel channel) const noexcept {
    return channel == TypeChannel::aspect ? aspect_probs : argument_probs;
  }
};

/// Scales every embedding row to unit L2 norm (zero rows are left as is).
void normalize_embeddings(AnnotatedDoc& doc);

/// Checks uniform dimensions and that type rows are probability vectors
/// (entries >= 0, sum 1 within 1e-6). Throws DataError.
void validate(const AnnotatedDoc& doc);

/// Sum over abstract sentences of the best dot product with any sentence of
/// either review.
double semantic_coverage(const AnnotatedDoc& review1, const AnnotatedDoc& review2,
                         const AnnotatedDoc& abstract);

/// Best-match similarity summed in both directions.
double semantic_redundancy(const AnnotatedDoc& review1, const AnnotatedDoc& review2);

/// Sum over all cross-review sentence pairs of (type-vector dot) x (embedding dot).
double weighted_semantic_redundancy(const AnnotatedDoc& review1, const AnnotatedDoc& review2,
                                    TypeChannel channel);

/// True when a pair is evaluated as (b, a). Both orders of a pair then run
/// the same floating-point operations, so the symmetric measures are exactly
/// symmetric.
bool evaluate_swapped(const AnnotatedDoc& a, const AnnotatedDoc& b) noexcept;

/// The two redundancy measures from a precomputed review1 x review2
/// similarity matrix.
double semantic_redundancy_gram(const Eigen::MatrixXd& gram);
double weighted_semantic_redundancy_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& types1,
                                         const Eigen::MatrixXd& types2);

/// Fraction of type categories that are the argmax type of at least one
/// sentence in either review. Ties resolve to the lowest category index.
double type_coverage(const AnnotatedDoc& review1, const AnnotatedDoc& review2, TypeChannel channel);

/// Deterministic stand-in for the annotation sidecar. The embedding is a
/// random-sign projection of the sentence's token multiset (signs seeded by a
/// hash of each token), L2-normalized; type vectors are smoothed keyword
/// counts over fixed per-category keyword lists. Stateless and thread-safe.
class FallbackAnnotator {
 public:
  explicit FallbackAnnotator(std::uint64_t seed = 0x5eed, std::size_t dim = kEmbeddingDim);

  AnnotatedDoc annotate(std::string doc_id, const std::vector<std::string>& sentences) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t dim() const noexcept { return dim_; }

  static const std::vector<std::vector<std::string>>& keywords(TypeChannel channel);
  static std::string model_name() { return "fallback-hash-v1"; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

/// Annotations keyed by document id, as read from an annotations.jsonl file or
/// produced by the fallback annotator.
struct AnnotationBundle {
  std::string model;
  std::size_t dim = kEmbeddingDim;
  std::map<std::string, AnnotatedDoc> docs;

  const AnnotatedDoc& at(const std::string& doc_id) const;
};

inline constexpr std::string_view kAnnotationSchema = "slate-lens/annotations/v1";

/// Reads and validates an annotations file: header, dimensions, probability
/// vectors and contiguous sentence indices. Embeddings are re-normalized.
AnnotationBundle read_annotations(const std::filesystem::path& path);

/// Writes the header line and one record per sentence, atomically (temp file
/// then rename).
void write_annotations(const AnnotationBundle& bundle, const std::filesystem::path& path);

/// One sentence record of the sidecar's input file.
struct SentenceRecord {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string text;
};

void write_sentences(const std::vector<SentenceRecord>& records, const std::filesystem::path& path);

}  // namespace slatelens
