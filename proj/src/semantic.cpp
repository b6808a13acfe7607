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

#include "slatelens/semantic.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"
#include "slatelens/text.hpp"

namespace slatelens {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kProbTolerance = 1e-6;
constexpr double kKeywordSmoothing = 0.1;

void require_same_dim(const AnnotatedDoc& a, const AnnotatedDoc& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DataError(std::string(what) + ": embedding dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()) + ")");
  }
}

void require_types(const AnnotatedDoc& d, TypeChannel channel, const char* what) {
  const auto& t = d.types(channel);
  if (static_cast<std::size_t>(t.rows()) != d.size() || static_cast<std::size_t>(t.cols()) != type_count(channel)) {
    throw DataError(std::string(what) + ": document " + d.doc_id + " lacks " + std::string(to_string(channel)) +
                    " type vectors");
  }
}

Eigen::Index argmax_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    if (m(row, j) > m(row, best)) best = j;
  }
  return best;
}

Eigen::RowVectorXd smoothed_counts(const std::vector<std::string>& tokens,
                                   const std::vector<std::vector<std::string>>& table) {
  Eigen::RowVectorXd counts = Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(table.size()), kKeywordSmoothing);
  for (const auto& tok : tokens) {
    for (std::size_t c = 0; c < table.size(); ++c) {
      for (const auto& kw : table[c]) {
        if (tok == kw) counts[static_cast<Eigen::Index>(c)] += 1.0;
      }
    }
  }
  return counts / counts.sum();
}

std::vector<double> row_to_vector(const Eigen::MatrixXd& m, Eigen::Index row) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(j)] = m(row, j);
  return v;
}

}  // namespace

std::size_t type_count(TypeChannel channel) noexcept {
  return channel == TypeChannel::aspect ? kAspectCount : kArgumentCount;
}

std::string_view to_string(TypeChannel channel) noexcept {
  return channel == TypeChannel::aspect ? "aspect" : "argument";
}

void normalize_embeddings(AnnotatedDoc& doc) {
  for (Eigen::Index i = 0; i < doc.embeddings.rows(); ++i) {
    const double n = doc.embeddings.row(i).norm();
    if (n > 0.0) doc.embeddings.row(i) /= n;
  }
}

void validate(const AnnotatedDoc& doc) {
  const auto n = doc.embeddings.rows();
  for (const auto channel : {TypeChannel::aspect, TypeChannel::argument}) {
    const auto& t = doc.types(channel);
    if (t.rows() != n || static_cast<std::size_t>(t.cols()) != type_count(channel)) {
      throw DataError("document " + doc.doc_id + ": " + std::string(to_string(channel)) + " vectors have wrong shape");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((t.row(i).array() < 0.0).any() || std::abs(t.row(i).sum() - 1.0) > kProbTolerance) {
        throw DataError("document " + doc.doc_id + ": sentence " + std::to_string(i) + " " +
                        std::string(to_string(channel)) + " vector is not a probability distribution");
      }
    }
  }
  if (!doc.embeddings.allFinite()) throw DataError("document " + doc.doc_id + ": non-finite embedding");
}

double semantic_coverage(const AnnotatedDoc& review1, const AnnotatedDoc& review2, const AnnotatedDoc& abstract) {
  require_same_dim(review1, abstract, "semantic coverage");
  require_same_dim(review2, abstract, "semantic coverage");
  if (abstract.size() == 0) throw DataError("semantic coverage: empty abstract");
  if (review1.size() + review2.size() == 0) throw DataError("semantic coverage: both reviews are empty");
  const Eigen::MatrixXd g1 = abstract.embeddings * review1.embeddings.transpose();
  const Eigen::MatrixXd g2 = abstract.embeddings * review2.embeddings.transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < g1.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    if (g1.cols() > 0) best = g1.row(i).maxCoeff();
    if (g2.cols() > 0) best = std::max(best, g2.row(i).maxCoeff());
    total += best;
  }
  return total;
}

bool evaluate_swapped(const AnnotatedDoc& a, const AnnotatedDoc& b) noexcept {
  if (a.embeddings.rows() != b.embeddings.rows()) return a.embeddings.rows() > b.embeddings.rows();
  if (a.embeddings.size() != b.embeddings.size()) return a.embeddings.size() > b.embeddings.size();
  const double* pa = a.embeddings.data();
  const double* pb = b.embeddings.data();
  return std::lexicographical_compare(pb, pb + b.embeddings.size(), pa, pa + a.embeddings.size());
}

double semantic_redundancy(const AnnotatedDoc& review1, const AnnotatedDoc& review2) {
  require_same_dim(review1, review2, "semantic redundancy");
  if (review1.size() == 0 || review2.size() == 0) throw DataError("semantic redundancy: empty review");
  if (evaluate_swapped(review1, review2)) return semantic_redundancy_gram(review2.embeddings * review1.embeddings.transpose());
  return semantic_redundancy_gram(review1.embeddings * review2.embeddings.transpose());
}

double semantic_redundancy_gram(const Eigen::MatrixXd& gram) {
  return gram.rowwise().maxCoeff().sum() + gram.colwise().maxCoeff().sum();
}

double weighted_semantic_redundancy(const AnnotatedDoc& review1, const AnnotatedDoc& review2, TypeChannel channel) {
  require_same_dim(review1, review2, "weighted semantic redundancy");
  require_types(review1, channel, "weighted semantic redundancy");
  require_types(review2, channel, "weighted semantic redundancy");
  if (evaluate_swapped(review1, review2)) {
    return weighted_semantic_redundancy_gram(review2.embeddings * review1.embeddings.transpose(),
                                             review2.types(channel), review1.types(channel));
  }
  return weighted_semantic_redundancy_gram(review1.embeddings * review2.embeddings.transpose(), review1.types(channel),
                                           review2.types(channel));
}

double weighted_semantic_redundancy_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& types1,
                                         const Eigen::MatrixXd& types2) {
  return gram.cwiseProduct(types1 * types2.transpose()).sum();
}

double type_coverage(const AnnotatedDoc& review1, const AnnotatedDoc& review2, TypeChannel channel) {
  std::vector<bool> seen(type_count(channel), false);
  for (const auto* doc : {&review1, &review2}) {
    const auto& t = doc->types(channel);
    for (Eigen::Index i = 0; i < t.rows(); ++i) seen[static_cast<std::size_t>(argmax_row(t, i))] = true;
  }
  std::size_t covered = 0;
  for (bool b : seen) covered += b ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(type_count(channel));
}

FallbackAnnotator::FallbackAnnotator(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {}

const std::vector<std::vector<std::string>>& FallbackAnnotator::keywords(TypeChannel channel) {
  static const std::vector<std::vector<std::string>> aspects = {
      {"summary", "summarize", "summarizes", "proposes", "presents", "introduces", "describes", "studies"},
      {"motivation", "motivated", "impact", "important", "significance", "useful", "relevance", "practical"},
      {"novel", "novelty", "original", "originality", "new", "incremental", "innovative", "first"},
      {"correct", "correctness", "sound", "soundness", "proof", "theorem", "flawed", "rigorous"},
      {"experiments", "experiment", "experimental", "empirical", "results", "ablation", "thorough", "substance"},
      {"code", "reproduce", "reproducible", "reproducibility", "replicate", "hyperparameters", "implementation",
       "released"},
      {"baseline", "baselines", "comparison", "compare", "compared", "prior", "state-of-the-art", "sota"},
      {"clear", "clarity", "unclear", "written", "writing", "readable", "presentation", "typos"}};
  static const std::vector<std::vector<std::string>> arguments = {
      {"good", "weak", "strong", "interesting", "convincing", "unconvincing", "limited", "excellent"},
      {"uses", "shows", "contains", "defines", "consists", "reports", "achieves", "applies"},
      {"please", "should", "suggest", "recommend", "consider", "clarify", "add", "include"},
      {"et", "al", "arxiv", "cite", "cited", "citation", "references", "proceedings"},
      {"quote", "quoted", "states", "claims", "says", "writes", "according", "verbatim"}};
  return channel == TypeChannel::aspect ? aspects : arguments;
}

AnnotatedDoc FallbackAnnotator::annotate(std::string doc_id, const std::vector<std::string>& sentences) const {
  const auto n = static_cast<Eigen::Index>(sentences.size());
  const auto d = static_cast<Eigen::Index>(dim_);
  AnnotatedDoc doc{std::move(doc_id), Eigen::MatrixXd::Zero(n, d), Eigen::MatrixXd(n, kAspectCount),
                   Eigen::MatrixXd(n, kArgumentCount)};
  // kSpread[v] has byte b equal to bit b of v, so adding it to a word of
  // eight byte-wide counters counts eight sign bits at once.
  static const auto kSpread = [] {
    std::array<std::uint64_t, 256> t{};
    for (std::uint64_t v = 0; v < 256; ++v) {
      for (std::uint64_t b = 0; b < 8; ++b) t[v] |= ((v >> b) & 1U) << (8 * b);
    }
    return t;
  }();
  const std::size_t words = (dim_ + 63) / 64;
  std::vector<std::uint64_t> lanes(words * 8);
  std::vector<std::int64_t> acc(words * 64);
  Eigen::RowVectorXd row(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto tokens = tokenize(sentences[static_cast<std::size_t>(i)]);
    // An empty bag hashes the empty token so every sentence gets a unit vector.
    if (tokens.empty()) tokens.emplace_back();
    std::fill(acc.begin(), acc.end(), 0);
    auto flush = [&] {
      for (std::size_t q = 0; q < lanes.size(); ++q) {
        for (std::size_t b = 0; b < 8; ++b) acc[8 * q + b] += static_cast<std::int64_t>((lanes[q] >> (8 * b)) & 0xFFU);
      }
      std::fill(lanes.begin(), lanes.end(), 0);
    };
    std::fill(lanes.begin(), lanes.end(), 0);
    std::size_t pending = 0;
    for (const auto& tok : tokens) {
      Rng signs(fnv1a64(tok, seed_));
      for (std::size_t j = 0; j < words; ++j) {
        std::uint64_t bits = signs.next();
        std::uint64_t* lane = lanes.data() + 8 * j;
        for (std::size_t q = 0; q < 8; ++q, bits >>= 8U) lane[q] += kSpread[bits & 0xFFU];
      }
      if (++pending == 255) {
        flush();
        pending = 0;
      }
    }
    flush();
    // Set bits count +1, clear bits -1.
    const auto total = static_cast<std::int64_t>(tokens.size());
    acc.resize(dim_);
    for (auto& v : acc) v = 2 * v - total;
    double norm2 = 0.0;
    for (auto v : acc) norm2 += static_cast<double>(v) * static_cast<double>(v);
    if (norm2 == 0.0) {
      // Sign vectors of distinct tokens cancelled exactly; fall back to axis 0.
      doc.embeddings(i, 0) = 1.0;
    } else {
      const double inv = 1.0 / std::sqrt(norm2);
      for (Eigen::Index k = 0; k < d; ++k) row[k] = static_cast<double>(acc[static_cast<std::size_t>(k)]) * inv;
      doc.embeddings.row(i) = row;
    }
    acc.resize(words * 64);
    doc.aspect_probs.row(i) = smoothed_counts(tokens, keywords(TypeChannel::aspect));
    doc.argument_probs.row(i) = smoothed_counts(tokens, keywords(TypeChannel::argument));
  }
  return doc;
}

const AnnotatedDoc& AnnotationBundle::at(const std::string& doc_id) const {
  const auto it = docs.find(doc_id);
  if (it == docs.end()) throw DataError("no annotations for document " + doc_id);
  return it->second;
}

AnnotationBundle read_annotations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };

  AnnotationBundle bundle;
  bool have_header = false;
  struct Row {
    std::vector<double> emb, asp, arg;
  };
  std::map<std::string, std::map<std::size_t, Row>> rows;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || j.value("schema", "") != kAnnotationSchema) fail("missing or wrong schema header");
      if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long>() <= 0) fail("header lacks dim");
      bundle.dim = j["dim"].get<std::size_t>();
      bundle.model = j.value("model", "");
      have_header = true;
      continue;
    }
    try {
      Row r{j.at("embedding").get<std::vector<double>>(), j.at("aspect_probs").get<std::vector<double>>(),
            j.at("argument_probs").get<std::vector<double>>()};
      if (r.emb.size() != bundle.dim) fail("embedding dimension differs from header dim");
      if (r.asp.size() != kAspectCount) fail("aspect_probs must have 8 entries");
      if (r.arg.size() != kArgumentCount) fail("argument_probs must have 5 entries");
      const auto doc = j.at("doc_id").get<std::string>();
      const auto idx = j.at("sentence_index").get<std::size_t>();
      if (!rows[doc].emplace(idx, std::move(r)).second) fail("duplicate sentence index");
    } catch (const json::exception& e) {
      fail(std::string("schema violation: ") + e.what());
    }
  }
  if (!have_header) throw DataError(path.string() + ": empty annotations file");

  for (auto& [doc_id, sentences] : rows) {
    const auto n = static_cast<Eigen::Index>(sentences.size());
    AnnotatedDoc doc{doc_id, Eigen::MatrixXd(n, static_cast<Eigen::Index>(bundle.dim)),
                     Eigen::MatrixXd(n, kAspectCount), Eigen::MatrixXd(n, kArgumentCount)};
    Eigen::Index i = 0;
    for (auto& [idx, r] : sentences) {
      if (idx != static_cast<std::size_t>(i)) {
        throw DataError(path.string() + ": document " + doc_id + " has non-contiguous sentence indices");
      }
      doc.embeddings.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.emb.data(), static_cast<Eigen::Index>(r.emb.size()));
      doc.aspect_probs.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.asp.data(), kAspectCount);
      doc.argument_probs.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.arg.data(), kArgumentCount);
      ++i;
    }
    normalize_embeddings(doc);
    validate(doc);
    bundle.docs.emplace(doc_id, std::move(doc));
  }
  return bundle;
}

void write_annotations(const AnnotationBundle& bundle, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << json{{"schema", kAnnotationSchema}, {"dim", bundle.dim}, {"model", bundle.model}}.dump() << '\n';
    for (const auto& [id, doc] : bundle.docs) {
      for (Eigen::Index i = 0; i < doc.embeddings.rows(); ++i) {
        json rec = {{"doc_id", id},
                    {"sentence_index", i},
                    {"embedding", row_to_vector(doc.embeddings, i)},
                    {"aspect_probs", row_to_vector(doc.aspect_probs, i)},
                    {"argument_probs", row_to_vector(doc.argument_probs, i)}};
        out << rec.dump() << '\n';
      }
    }
  }
  fs::rename(tmp, path);
}

void write_sentences(const std::vector<SentenceRecord>& records, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) {
    out << json{{"doc_id", r.doc_id}, {"sentence_index", r.sentence_index}, {"text", r.text}}.dump() << '\n';
  }
}

}  // namespace slatelens
