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
#include <memory>
#include <string>
#include <vector>

#include "slatelens/corpus.hpp"
#include "slatelens/lexical.hpp"
#include "slatelens/measures.hpp"
#include "slatelens/semantic.hpp"

namespace slatelens {

/// Where sentence annotations come from: a sidecar bundle or the fallback.
class AnnotationSource {
 public:
  virtual ~AnnotationSource() = default;
  /// Annotations of one document. Must be thread-safe.
  virtual AnnotatedDoc get(const std::string& doc_id, const std::vector<std::string>& sentences) const = 0;
  virtual std::string model() const = 0;
};

class FallbackSource final : public AnnotationSource {
 public:
  explicit FallbackSource(FallbackAnnotator annotator = FallbackAnnotator{}) : annotator_(annotator) {}
  AnnotatedDoc get(const std::string& doc_id, const std::vector<std::string>& sentences) const override;
  std::string model() const override { return FallbackAnnotator::model_name(); }

 private:
  FallbackAnnotator annotator_;
};

class BundleSource final : public AnnotationSource {
 public:
  explicit BundleSource(std::shared_ptr<const AnnotationBundle> bundle) : bundle_(std::move(bundle)) {}
  /// Throws DataError when the document is absent or its sentence count
  /// differs from the corpus.
  AnnotatedDoc get(const std::string& doc_id, const std::vector<std::string>& sentences) const override;
  std::string model() const override { return bundle_->model; }

 private:
  std::shared_ptr<const AnnotationBundle> bundle_;
};

std::string abstract_doc_id(const Submission& s);

/// Every sentence of the corpus as sidecar input records: reviews under their
/// review id, abstracts under "abstract/<submission id>".
std::vector<SentenceRecord> sentence_records(const ReviewCorpus& corpus);

/// Annotates every corpus document with `source`.
AnnotationBundle annotate_corpus(const ReviewCorpus& corpus, const AnnotationSource& source);

struct PairKey {
  std::size_t submission = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  bool operator==(const PairKey&) const = default;
};

/// Raw measure values for every co-assigned pair with reviews from both
/// reviewers, in submission order then slate order.
struct PairMeasureTable {
  std::vector<PairKey> keys;
  std::vector<MeasureValues> values;  // NaN for measures not computed
  MeasureSet measures = kEveryMeasure;
};

/// The measures in `want` for one review pair; the rest are NaN.
MeasureValues measure_pair(const AnnotatedDoc& r1, const AnnotatedDoc& r2, const AnnotatedDoc& abstract,
                           const std::vector<std::string>& s1, const std::vector<std::string>& s2,
                           const std::vector<std::string>& abstract_sentences, const MeasureSet& want = kEveryMeasure);

/// Same, from pre-extracted n-gram sets.
MeasureValues measure_pair(const AnnotatedDoc& r1, const AnnotatedDoc& r2, const AnnotatedDoc& abstract,
                           const NgramSet& n1, const NgramSet& n2, const NgramSet& na,
                           const MeasureSet& want = kEveryMeasure);

/// Submissions are processed in parallel (OpenMP); each writes to slots fixed
/// in advance, so the table does not depend on the schedule.
PairMeasureTable compute_pair_measures(const ReviewCorpus& corpus, const AnnotationSource& source,
                                       const MeasureSet& want = kEveryMeasure);

/// Single-threaded reference with identical output.
PairMeasureTable compute_pair_measures_serial(const ReviewCorpus& corpus, const AnnotationSource& source,
                                              const MeasureSet& want = kEveryMeasure);

}  // namespace slatelens
