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

#include "slatelens/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"
#include "slatelens/text.hpp"

namespace slatelens {
using nlohmann::json;

namespace {

int sample_discrete(Rng& rng, const std::vector<double>& weights, double total) {
  double u = rng.uniform() * total;
  const int k = static_cast<int>(weights.size());
  for (int i = 0; i < k; ++i) {
    u -= weights[static_cast<std::size_t>(i)];
    if (u < 0.0) return i;
  }
  return k - 1;
}

}  // namespace

std::set<std::string> default_stop_words() {
  return {"a",     "about", "above", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",
          "are",   "as",    "at",    "be",    "been",  "being", "both",  "but",   "by",    "can",   "could",
          "did",   "do",    "does",  "each",  "few",   "for",   "from",  "further", "had", "has",   "have",
          "he",    "her",   "here",  "his",   "how",   "i",     "if",    "in",    "into",  "is",    "it",
          "its",   "more",  "most",  "no",    "nor",   "not",   "of",    "on",    "only",  "or",    "other",
          "our",   "out",   "over",  "same",  "she",   "should", "so",   "some",  "such",  "than",  "that",
          "the",   "their", "them",  "then",  "there", "these", "they",  "this",  "those", "through", "to",
          "too",   "under", "up",    "very",  "was",   "we",    "were",  "what",  "when",  "where", "which",
          "while", "who",   "whom",  "why",   "will",  "with",  "would", "you",   "your",  "using", "use",
          "based", "paper", "show",  "propose", "proposed", "approach", "method", "methods", "results", "new"};
}

std::set<std::string> read_stop_words(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stop-word file " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (auto& tok : tokenize(t)) words.insert(std::move(tok));
  }
  return words;
}

TopicCorpus prepare_topic_corpus(const std::vector<std::vector<std::string>>& token_docs,
                                 const std::set<std::string>& stop_words, int min_df) {
  std::map<std::string, int> df;
  for (const auto& doc : token_docs) {
    std::set<std::string> uniq;
    for (const auto& t : doc) {
      if (!stop_words.count(t)) uniq.insert(t);
    }
    for (const auto& t : uniq) ++df[t];
  }
  TopicCorpus out;
  std::map<std::string, int> id;
  for (const auto& [tok, n] : df) {
    if (n >= min_df) {
      id[tok] = static_cast<int>(out.vocabulary.size());
      out.vocabulary.push_back(tok);
    }
  }
  out.docs.reserve(token_docs.size());
  for (const auto& doc : token_docs) {
    std::vector<int> ids;
    for (const auto& t : doc) {
      if (auto it = id.find(t); it != id.end()) ids.push_back(it->second);
    }
    out.docs.push_back(std::move(ids));
  }
  return out;
}

std::optional<int> TopicModel::word_id(const std::string& token) const {
  if (index_.size() != vocabulary.size()) const_cast<TopicModel*>(this)->reindex();
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TopicModel::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], static_cast<int>(i));
}

TopicModel fit_lda(const TopicCorpus& corpus, int k, const LdaOptions& options) {
  const int v = static_cast<int>(corpus.vocabulary.size());
  std::size_t tokens = 0;
  for (const auto& d : corpus.docs) tokens += d.size();
  if (corpus.docs.empty() || tokens == 0) throw DataError("LDA: empty corpus");
  if (v == 0) throw DataError("LDA: empty vocabulary");
  if (k < 2) throw ConfigError("LDA: topic count must be at least 2");
  if (static_cast<std::size_t>(k) > corpus.docs.size()) {
    throw ConfigError("LDA: topic count " + std::to_string(k) + " exceeds document count " +
                      std::to_string(corpus.docs.size()));
  }
  if (options.iterations < 1 || options.beta <= 0.0) throw ConfigError("LDA: invalid sampler options");

  const double alpha = options.alpha > 0.0 ? options.alpha : 50.0 / k;
  const double beta = options.beta;
  const double vbeta = beta * v;
  const auto ku = static_cast<std::size_t>(k);
  const auto vu = static_cast<std::size_t>(v);

  Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(k)));
  std::vector<std::vector<int>> z(corpus.docs.size());
  std::vector<int> ndk(corpus.docs.size() * ku, 0);
  std::vector<int> nkw(ku * vu, 0);
  std::vector<int> nk(ku, 0);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    z[d].resize(corpus.docs[d].size());
    for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
      const int t = static_cast<int>(rng.below(ku));
      const int w = corpus.docs[d][i];
      z[d][i] = t;
      ++ndk[d * ku + static_cast<std::size_t>(t)];
      ++nkw[static_cast<std::size_t>(t) * vu + static_cast<std::size_t>(w)];
      ++nk[static_cast<std::size_t>(t)];
    }
  }

  TopicModel model;
  model.k = k;
  model.alpha = alpha;
  model.beta = beta;
  model.iterations = options.iterations;
  model.seed = options.seed;
  model.vocabulary = corpus.vocabulary;
  model.topic_word = Eigen::MatrixXd::Zero(k, v);
  int collected = 0;

  auto accumulate_phi = [&] {
    for (std::size_t t = 0; t < ku; ++t) {
      const double denom = nk[t] + vbeta;
      for (std::size_t w = 0; w < vu; ++w) {
        model.topic_word(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(w)) += (nkw[t * vu + w] + beta) / denom;
      }
    }
    ++collected;
  };

  auto log_likelihood = [&] {
    double ll = k * (std::lgamma(vbeta) - v * std::lgamma(beta));
    for (std::size_t t = 0; t < ku; ++t) {
      for (std::size_t w = 0; w < vu; ++w) ll += std::lgamma(nkw[t * vu + w] + beta);
      ll -= std::lgamma(nk[t] + vbeta);
    }
    return ll;
  };

  std::vector<double> p(ku);
  for (int it = 1; it <= options.iterations; ++it) {
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      int* nd = &ndk[d * ku];
      for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(corpus.docs[d][i]);
        auto t = static_cast<std::size_t>(z[d][i]);
        --nd[t];
        --nkw[t * vu + w];
        --nk[t];
        double total = 0.0;
        for (std::size_t j = 0; j < ku; ++j) {
          p[j] = (nd[j] + alpha) * (nkw[j * vu + w] + beta) / (nk[j] + vbeta);
          total += p[j];
        }
        t = static_cast<std::size_t>(sample_discrete(rng, p, total));
        z[d][i] = static_cast<int>(t);
        ++nd[t];
        ++nkw[t * vu + w];
        ++nk[t];
      }
    }
    if (options.log_likelihood_every > 0 && it % options.log_likelihood_every == 0) {
      model.log_likelihood.emplace_back(it, log_likelihood());
    }
    const int from_end = options.iterations - it;
    if (it > options.burn_in && options.sample_spacing > 0 && from_end % options.sample_spacing == 0 &&
        from_end / options.sample_spacing < options.samples) {
      accumulate_phi();
    }
  }
  if (collected == 0) accumulate_phi();
  model.topic_word /= static_cast<double>(collected);
  // Renormalize rows against accumulated rounding.
  for (Eigen::Index t = 0; t < model.topic_word.rows(); ++t) model.topic_word.row(t) /= model.topic_word.row(t).sum();
  model.reindex();
  return model;
}

std::vector<int> top_words(const TopicModel& model, int topic, int top_m) {
  const auto v = static_cast<int>(model.topic_word.cols());
  if (top_m > v) throw ConfigError("top_m exceeds vocabulary size");
  std::vector<int> idx(static_cast<std::size_t>(v));
  std::iota(idx.begin(), idx.end(), 0);
  const auto row = model.topic_word.row(topic);
  std::partial_sort(idx.begin(), idx.begin() + top_m, idx.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(top_m));
  return idx;
}

std::vector<double> topic_coherences(const TopicModel& model, const TopicCorpus& corpus, int top_m) {
  if (top_m < 2) throw ConfigError("top_m must be at least 2");
  if (corpus.vocabulary.size() != static_cast<std::size_t>(model.topic_word.cols())) {
    throw DataError("coherence: corpus vocabulary does not match the model");
  }
  std::vector<std::vector<int>> doc_sets;
  doc_sets.reserve(corpus.docs.size());
  for (const auto& d : corpus.docs) {
    std::vector<int> u = d;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    doc_sets.push_back(std::move(u));
  }
  auto has = [](const std::vector<int>& s, int w) { return std::binary_search(s.begin(), s.end(), w); };

  std::vector<double> out;
  for (int t = 0; t < model.k; ++t) {
    const auto words = top_words(model, t, top_m);
    const auto m = words.size();
    std::vector<int> single(m, 0);
    std::vector<int> joint(m * m, 0);
    for (const auto& s : doc_sets) {
      std::vector<bool> present(m);
      for (std::size_t i = 0; i < m; ++i) present[i] = has(s, words[i]);
      for (std::size_t i = 0; i < m; ++i) {
        if (!present[i]) continue;
        ++single[i];
        for (std::size_t j = 0; j < i; ++j) {
          if (present[j]) ++joint[i * m + j];
        }
      }
    }
    double c = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        c += std::log((joint[i * m + j] + 1.0) / std::max(single[j], 1));
      }
    }
    out.push_back(c);
  }
  return out;
}

double topic_coherence(const TopicModel& model, const TopicCorpus& corpus, int top_m) {
  const auto per_topic = topic_coherences(model, corpus, top_m);
  return std::accumulate(per_topic.begin(), per_topic.end(), 0.0) / static_cast<double>(per_topic.size());
}

TopicSelection select_topic_count(const TopicCorpus& corpus, const std::vector<int>& k_grid,
                                  const LdaOptions& options, int top_m) {
  if (k_grid.empty()) throw ConfigError("topic-count grid is empty");
  std::vector<int> grid = k_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<TopicModel> models(grid.size());
  std::vector<double> scores(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    models[i] = fit_lda(corpus, grid[i], options);
    scores[i] = topic_coherence(models[i], corpus, top_m);
  }
  TopicSelection sel;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sel.coherence[grid[i]] = scores[i];
    if (scores[i] > scores[best]) best = i;
  }
  sel.k = grid[best];
  sel.model = std::move(models[best]);
  return sel;
}

InferredTopics infer_topics(const TopicModel& model, const std::vector<std::string>& tokens, std::uint64_t seed,
                            const InferenceOptions& options) {
  const auto ku = static_cast<std::size_t>(model.k);
  std::vector<int> ids;
  for (const auto& t : tokens) {
    if (auto id = model.word_id(t)) ids.push_back(*id);
  }
  InferredTopics out;
  if (ids.empty()) {
    out.mixture = Eigen::VectorXd::Constant(model.k, 1.0 / model.k);
    out.out_of_vocabulary = true;
    return out;
  }
  Rng rng(seed);
  std::vector<int> z(ids.size());
  std::vector<int> nd(ku, 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    z[i] = static_cast<int>(rng.below(ku));
    ++nd[static_cast<std::size_t>(z[i])];
  }
  out.mixture = Eigen::VectorXd::Zero(model.k);
  int collected = 0;
  std::vector<double> p(ku);
  const double total_alpha = model.alpha * model.k;
  for (int it = 1; it <= options.iterations; ++it) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --nd[static_cast<std::size_t>(z[i])];
      double total = 0.0;
      for (std::size_t j = 0; j < ku; ++j) {
        p[j] = (nd[j] + model.alpha) * model.topic_word(static_cast<Eigen::Index>(j), ids[i]);
        total += p[j];
      }
      z[i] = sample_discrete(rng, p, total);
      ++nd[static_cast<std::size_t>(z[i])];
    }
    if (it > options.burn_in && options.sample_spacing > 0 && (options.iterations - it) % options.sample_spacing == 0) {
      for (std::size_t j = 0; j < ku; ++j) {
        out.mixture[static_cast<Eigen::Index>(j)] += (nd[j] + model.alpha) / (static_cast<double>(ids.size()) + total_alpha);
      }
      ++collected;
    }
  }
  if (collected == 0) {
    for (std::size_t j = 0; j < ku; ++j) {
      out.mixture[static_cast<Eigen::Index>(j)] = (nd[j] + model.alpha) / (static_cast<double>(ids.size()) + total_alpha);
    }
  }
  out.mixture /= out.mixture.sum();
  return out;
}

void write_topic_model(const TopicModel& model, const std::filesystem::path& path) {
  json j;
  j["k"] = model.k;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["iterations"] = model.iterations;
  j["seed"] = model.seed;
  j["vocabulary"] = model.vocabulary;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(model.topic_word.size()));
  for (Eigen::Index t = 0; t < model.topic_word.rows(); ++t) {
    for (Eigen::Index w = 0; w < model.topic_word.cols(); ++w) flat.push_back(model.topic_word(t, w));
  }
  j["topic_word"] = flat;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

TopicModel read_topic_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open topic model " + path.string());
  try {
    json j;
    in >> j;
    TopicModel m;
    m.k = j.at("k").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.iterations = j.at("iterations").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    const auto flat = j.at("topic_word").get<std::vector<double>>();
    const auto v = static_cast<Eigen::Index>(m.vocabulary.size());
    if (m.k < 2 || flat.size() != static_cast<std::size_t>(m.k) * m.vocabulary.size()) {
      throw DataError(path.string() + ": topic_word has the wrong size");
    }
    m.topic_word.resize(m.k, v);
    for (Eigen::Index t = 0; t < m.k; ++t) {
      for (Eigen::Index w = 0; w < v; ++w) m.topic_word(t, w) = flat[static_cast<std::size_t>(t * v + w)];
    }
    m.reindex();
    return m;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ReviewerTopics reviewer_topics(const ReviewCorpus& corpus, const ReviewerTopicOptions& options) {
  ReviewerTopics out;
  out.vectors.assign(corpus.reviewers.size(), std::nullopt);

  std::vector<std::vector<std::string>> training;
  std::vector<std::vector<std::string>> per_reviewer(corpus.reviewers.size());
  std::vector<bool> has_profile(corpus.reviewers.size(), false);
  for (std::size_t r = 0; r < corpus.reviewers.size(); ++r) {
    const auto& abstracts = corpus.reviewers[r].publication_abstracts;
    if (!abstracts || abstracts->empty()) continue;
    has_profile[r] = true;
    for (const auto& a : *abstracts) {
      auto toks = tokenize(a);
      per_reviewer[r].insert(per_reviewer[r].end(), toks.begin(), toks.end());
      training.push_back(std::move(toks));
    }
  }
  if (training.empty()) return out;

  const auto tc = prepare_topic_corpus(training, options.stop_words, options.min_df);
  out.selection = select_topic_count(tc, options.k_grid, options.lda, options.top_m);
  const auto& model = out.selection->model;

  std::vector<InferredTopics> inferred(corpus.reviewers.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < corpus.reviewers.size(); ++r) {
    if (!has_profile[r]) continue;
    inferred[r] = infer_topics(model, per_reviewer[r], derive_seed(options.lda.seed ^ 0x70b1c5ULL, r), options.inference);
  }
  for (std::size_t r = 0; r < corpus.reviewers.size(); ++r) {
    if (!has_profile[r]) continue;
    if (inferred[r].out_of_vocabulary) {
      out.warnings.push_back("reviewer " + corpus.reviewers[r].id +
                             ": no in-vocabulary publication tokens; using a uniform topic vector");
    }
    out.vectors[r] = std::move(inferred[r].mixture);
  }
  return out;
}

}  // namespace slatelens
