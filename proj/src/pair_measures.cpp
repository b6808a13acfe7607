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

#include "slatelens/pair_measures.hpp"

#include <limits>
#include <map>

#include "slatelens/error.hpp"
#include "slatelens/lexical.hpp"

namespace slatelens {

AnnotatedDoc FallbackSource::get(const std::string& doc_id, const std::vector<std::string>& sentences) const {
  return annotator_.annotate(doc_id, sentences);
}

AnnotatedDoc BundleSource::get(const std::string& doc_id, const std::vector<std::string>& sentences) const {
  const auto it = bundle_->docs.find(doc_id);
  if (it == bundle_->docs.end()) throw DataError("annotations missing for document " + doc_id);
  if (it->second.size() != sentences.size()) {
    throw DataError("annotations for document " + doc_id + " cover " + std::to_string(it->second.size()) +
                    " sentences; the corpus has " + std::to_string(sentences.size()));
  }
  return it->second;
}

std::string abstract_doc_id(const Submission& s) { return "abstract/" + s.id; }

std::vector<SentenceRecord> sentence_records(const ReviewCorpus& corpus) {
  std::vector<SentenceRecord> out;
  for (const auto& s : corpus.submissions) {
    for (std::size_t i = 0; i < s.abstract_sentences.size(); ++i) out.push_back({abstract_doc_id(s), i, s.abstract_sentences[i]});
  }
  for (const auto& r : corpus.reviews) {
    for (std::size_t i = 0; i < r.sentences.size(); ++i) out.push_back({r.id, i, r.sentences[i]});
  }
  return out;
}

AnnotationBundle annotate_corpus(const ReviewCorpus& corpus, const AnnotationSource& source) {
  AnnotationBundle bundle;
  bundle.model = source.model();
  for (const auto& s : corpus.submissions) {
    auto doc = source.get(abstract_doc_id(s), s.abstract_sentences);
    bundle.dim = doc.dim();
    bundle.docs.emplace(doc.doc_id, std::move(doc));
  }
  for (const auto& r : corpus.reviews) {
    auto doc = source.get(r.id, r.sentences);
    bundle.dim = doc.dim();
    bundle.docs.emplace(doc.doc_id, std::move(doc));
  }
  return bundle;
}

MeasureValues measure_pair(const AnnotatedDoc& r1, const AnnotatedDoc& r2, const AnnotatedDoc& abstract,
                           const std::vector<std::string>& s1, const std::vector<std::string>& s2,
                           const std::vector<std::string>& abstract_sentences, const MeasureSet& want) {
  const bool lexical = want[index_of(Measure::lexical_coverage)] || want[index_of(Measure::lexical_redundancy)];
  if (!lexical) return measure_pair(r1, r2, abstract, NgramSet{}, NgramSet{}, NgramSet{}, want);
  return measure_pair(r1, r2, abstract, extract_ngrams(s1), extract_ngrams(s2), extract_ngrams(abstract_sentences),
                      want);
}

MeasureValues measure_pair(const AnnotatedDoc& review1, const AnnotatedDoc& review2, const AnnotatedDoc& abstract,
                           const NgramSet& n1, const NgramSet& n2, const NgramSet& na, const MeasureSet& want) {
  const bool swapped = evaluate_swapped(review1, review2);
  const AnnotatedDoc& r1 = swapped ? review2 : review1;
  const AnnotatedDoc& r2 = swapped ? review1 : review2;
  MeasureValues v;
  v.fill(std::numeric_limits<double>::quiet_NaN());
  auto wants = [&](Measure m) { return want[index_of(m)]; };
  if (wants(Measure::argument_coverage)) v[index_of(Measure::argument_coverage)] = type_coverage(r1, r2, TypeChannel::argument);
  if (wants(Measure::aspect_coverage)) v[index_of(Measure::aspect_coverage)] = type_coverage(r1, r2, TypeChannel::aspect);
  if (wants(Measure::lexical_coverage)) {
    if (na.empty()) throw DataError("lexical coverage: empty abstract");
    v[index_of(Measure::lexical_coverage)] = lexical_coverage(n1, n2, na);
  }
  if (wants(Measure::semantic_coverage)) v[index_of(Measure::semantic_coverage)] = semantic_coverage(r1, r2, abstract);
  if (wants(Measure::lexical_redundancy)) v[index_of(Measure::lexical_redundancy)] = lexical_redundancy(n1, n2);
  const bool semantic = wants(Measure::semantic_redundancy) || wants(Measure::weighted_redundancy_argument) ||
                        wants(Measure::weighted_redundancy_aspect);
  if (!semantic) return v;
  // The three redundancy measures share one similarity matrix.
  if (r1.dim() != r2.dim()) throw DataError("semantic redundancy: embedding dimensions differ");
  if (r1.size() == 0 || r2.size() == 0) throw DataError("semantic redundancy: empty review");
  const Eigen::MatrixXd gram = r1.embeddings * r2.embeddings.transpose();
  if (wants(Measure::semantic_redundancy)) v[index_of(Measure::semantic_redundancy)] = semantic_redundancy_gram(gram);
  for (auto [m, channel] : {std::pair{Measure::weighted_redundancy_argument, TypeChannel::argument},
                            std::pair{Measure::weighted_redundancy_aspect, TypeChannel::aspect}}) {
    if (!wants(m)) continue;
    const auto& t1 = r1.types(channel);
    const auto& t2 = r2.types(channel);
    if (static_cast<std::size_t>(t1.rows()) != r1.size() || static_cast<std::size_t>(t2.rows()) != r2.size()) {
      throw DataError("weighted semantic redundancy: missing " + std::string(to_string(channel)) + " type vectors");
    }
    v[index_of(m)] = weighted_semantic_redundancy_gram(gram, t1, t2);
  }
  return v;
}

namespace {

// Pairs of a submission whose two reviewers both wrote a review.
std::vector<std::pair<std::size_t, std::size_t>> reviewed_pairs(const ReviewCorpus& corpus, std::size_t s) {
  const auto& slate = corpus.submissions[s].reviewers;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < slate.size(); ++i) {
    for (std::size_t j = i + 1; j < slate.size(); ++j) {
      if (corpus.review_for(s, slate[i]) && corpus.review_for(s, slate[j])) out.emplace_back(slate[i], slate[j]);
    }
  }
  return out;
}

std::vector<std::size_t> layout(const ReviewCorpus& corpus, PairMeasureTable& table) {
  std::vector<std::size_t> offsets(corpus.submissions.size() + 1, 0);
  for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
    const auto pairs = reviewed_pairs(corpus, s);
    offsets[s + 1] = offsets[s] + pairs.size();
    for (const auto& [a, b] : pairs) table.keys.push_back({s, a, b});
  }
  table.values.assign(table.keys.size(), MeasureValues{});
  return offsets;
}

void measure_submission(const ReviewCorpus& corpus, const AnnotationSource& source, std::size_t s,
                        std::size_t offset, PairMeasureTable& table) {
  const auto& want = table.measures;
  bool lexical = false;
  bool annotated = false;
  for (auto m : kAllMeasures) {
    if (!want[index_of(m)]) continue;
    (is_lexical(m) ? lexical : annotated) = true;
  }
  const auto& sub = corpus.submissions[s];
  const auto pairs = reviewed_pairs(corpus, s);
  if (pairs.empty()) return;
  auto annotate = [&](const std::string& id, const std::vector<std::string>& sentences) {
    return annotated ? source.get(id, sentences) : AnnotatedDoc{id, {}, {}, {}};
  };
  auto ngrams = [&](const std::vector<std::string>& sentences) { return lexical ? extract_ngrams(sentences) : NgramSet{}; };
  const auto abstract = annotate(abstract_doc_id(sub), sub.abstract_sentences);
  const auto abstract_ngrams = ngrams(sub.abstract_sentences);
  std::map<std::size_t, std::pair<AnnotatedDoc, NgramSet>> docs;
  for (auto r : sub.reviewers) {
    if (const auto* review = corpus.review_for(s, r)) {
      docs.emplace(r, std::make_pair(annotate(review->id, review->sentences), ngrams(review->sentences)));
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [a, b] = docs.at(pairs[k].first);
    const auto& [c, d] = docs.at(pairs[k].second);
    table.values[offset + k] = measure_pair(a, c, abstract, b, d, abstract_ngrams, want);
  }
}

std::string where(const ReviewCorpus& corpus, std::size_t s) { return "submission " + corpus.submissions[s].id + ": "; }

}  // namespace

PairMeasureTable compute_pair_measures(const ReviewCorpus& corpus, const AnnotationSource& source,
                                       const MeasureSet& want) {
  PairMeasureTable table;
  table.measures = want;
  const auto offsets = layout(corpus, table);
  const auto n = static_cast<std::ptrdiff_t>(corpus.submissions.size());
  std::vector<std::string> errors(corpus.submissions.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto su = static_cast<std::size_t>(s);
    try {
      measure_submission(corpus, source, su, offsets[su], table);
    } catch (const std::exception& e) {
      errors[su] = where(corpus, su) + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw DataError(e);
  }
  return table;
}

PairMeasureTable compute_pair_measures_serial(const ReviewCorpus& corpus, const AnnotationSource& source,
                                              const MeasureSet& want) {
  PairMeasureTable table;
  table.measures = want;
  const auto offsets = layout(corpus, table);
  for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
    try {
      measure_submission(corpus, source, s, offsets[s], table);
    } catch (const std::exception& e) {
      throw DataError(where(corpus, s) + e.what());
    }
  }
  return table;
}

}  // namespace slatelens
