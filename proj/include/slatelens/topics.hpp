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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "slatelens/corpus.hpp"

namespace slatelens {

/// Documents as indices into a shared vocabulary.
struct TopicCorpus {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<std::vector<int>> docs;
};

std::set<std::string> default_stop_words();
std::set<std::string> read_stop_words(const std::filesystem::path& path);

/// Drops stop words and tokens appearing in fewer than `min_df` documents.
/// Documents left empty are kept (as empty lists) so indices line up.
TopicCorpus prepare_topic_corpus(const std::vector<std::vector<std::string>>& token_docs,
                                 const std::set<std::string>& stop_words, int min_df);

struct LdaOptions {
  double alpha = -1.0;  // <= 0 means 50 / K
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 500;
  int samples = 10;
  int sample_spacing = 50;
  int log_likelihood_every = 10;
  std::uint64_t seed = 1;
};

struct TopicModel {
  int k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd topic_word;  // k x V, rows sum to 1
  std::vector<std::pair<int, double>> log_likelihood;  // (iteration, log p(w | z))

  std::optional<int> word_id(const std::string& token) const;
  void reindex();

 private:
  std::unordered_map<std::string, int> index_;
};

/// Collapsed Gibbs sampler. topic_word is the average of the smoothed
/// estimates taken at the last `samples` iterations spaced `sample_spacing`
/// apart after burn-in (the final state alone if none qualify).
TopicModel fit_lda(const TopicCorpus& corpus, int k, const LdaOptions& options);

/// Document co-occurrence coherence of each topic's top `top_m` words:
/// sum over ranked pairs i > j of log((D(w_i, w_j) + 1) / D(w_j)).
std::vector<double> topic_coherences(const TopicModel& model, const TopicCorpus& corpus, int top_m);
double topic_coherence(const TopicModel& model, const TopicCorpus& corpus, int top_m);

/// Indices of the top_m words of a topic, by probability then word index.
std::vector<int> top_words(const TopicModel& model, int topic, int top_m);

struct TopicSelection {
  int k = 0;
  std::map<int, double> coherence;
  TopicModel model;
};

/// Fits one model per grid entry and keeps the most coherent; ties go to the
/// smaller K.
TopicSelection select_topic_count(const TopicCorpus& corpus, const std::vector<int>& k_grid,
                                  const LdaOptions& options, int top_m);

struct InferenceOptions {
  int iterations = 200;
  int burn_in = 100;
  int sample_spacing = 10;
};

struct InferredTopics {
  Eigen::VectorXd mixture;
  bool out_of_vocabulary = false;  // no known token; mixture is uniform
};

/// Topic mixture of one document with topic_word held fixed.
InferredTopics infer_topics(const TopicModel& model, const std::vector<std::string>& tokens, std::uint64_t seed,
                            const InferenceOptions& options = {});

void write_topic_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel read_topic_model(const std::filesystem::path& path);

struct ReviewerTopicOptions {
  std::vector<int> k_grid{10};
  LdaOptions lda;
  InferenceOptions inference;
  int top_m = 10;
  int min_df = 2;
  std::set<std::string> stop_words = default_stop_words();
};

struct ReviewerTopics {
  std::optional<TopicSelection> selection;  // absent when no reviewer has abstracts
  std::vector<std::optional<Eigen::VectorXd>> vectors;  // by reviewer index
  std::vector<std::string> warnings;
};

/// Trains on individual publication abstracts and infers each reviewer's
/// mixture from the concatenation of their abstracts. Reviewers without
/// abstracts get no vector.
ReviewerTopics reviewer_topics(const ReviewCorpus& corpus, const ReviewerTopicOptions& options);

}  // namespace slatelens
