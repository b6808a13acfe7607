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

#include "slatelens/diversity.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "slatelens/calibration.hpp"
#include "slatelens/error.hpp"

namespace slatelens {
namespace {

bool share_any(const std::vector<int>& a, const std::vector<int>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

bool contains(const std::vector<int>& sorted, int x) { return std::binary_search(sorted.begin(), sorted.end(), x); }

}  // namespace

std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::organization: return "organization";
    case Dimension::geographical: return "geographical";
    case Dimension::seniority: return "seniority";
    case Dimension::topical: return "topical";
    case Dimension::coauthorship: return "coauthorship";
  }
  return "unknown";
}

std::optional<Dimension> parse_dimension(std::string_view name) noexcept {
  for (auto d : kAllDimensions) {
    if (to_string(d) == name) return d;
  }
  if (name == "geography" || name == "location") return Dimension::geographical;
  if (name == "topic") return Dimension::topical;
  if (name == "coauthor") return Dimension::coauthorship;
  return std::nullopt;
}

Thresholds read_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open thresholds file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  Thresholds t;
  if (j.contains("h_index")) {
    if (!j["h_index"].is_number()) throw ConfigError(path.string() + ": h_index must be a number");
    t.h_index = j["h_index"].get<double>();
  }
  if (j.contains("topical_similarity")) {
    if (!j["topical_similarity"].is_number()) throw ConfigError(path.string() + ": topical_similarity must be a number");
    t.topical_similarity = j["topical_similarity"].get<double>();
  }
  return t;
}

bool ProfileVectors::missing(Dimension d) const noexcept {
  switch (d) {
    case Dimension::organization: return organizations.empty();
    case Dimension::geographical: return !region.has_value();
    case Dimension::seniority: return !seniority.has_value();
    case Dimension::topical: return !topics.has_value();
    case Dimension::coauthorship: return !coauthors.has_value();
  }
  return true;
}

ProfileVectors build_profile_vectors(const ReviewerRecord& record, int person, double h_threshold,
                                     const std::optional<Eigen::VectorXd>& topics) {
  ProfileVectors p;
  p.person = person;
  p.organizations = record.organization_ids;
  std::sort(p.organizations.begin(), p.organizations.end());
  p.region = record.region_id;
  if (record.h_index) p.seniority = static_cast<double>(*record.h_index) > h_threshold ? 1 : 0;
  if (record.coauthor_ids) {
    std::vector<int> co;
    for (int c : *record.coauthor_ids) {
      if (c != person) co.push_back(c);
    }
    std::sort(co.begin(), co.end());
    co.erase(std::unique(co.begin(), co.end()), co.end());
    p.coauthors = std::move(co);
  }
  p.topics = topics;
  return p;
}

double topical_similarity(const Eigen::VectorXd& t1, const Eigen::VectorXd& t2) {
  if (t1.size() != t2.size()) {
    throw DataError("topical similarity: topic vectors of length " + std::to_string(t1.size()) + " and " +
                    std::to_string(t2.size()));
  }
  return t1.dot(t2);
}

std::optional<int> coauthor_distance(const ProfileVectors& p1, const ProfileVectors& p2) {
  if (!p1.coauthors || !p2.coauthors) return std::nullopt;
  if (p1.person == p2.person) return 0;
  if (contains(*p1.coauthors, p2.person) || contains(*p2.coauthors, p1.person)) return 1;
  if (share_any(*p1.coauthors, *p2.coauthors)) return 2;
  return kUnreachable;
}

int pair_diversity(const ProfileVectors& p1, const ProfileVectors& p2, Dimension d,
                   const ResolvedThresholds& thresholds) {
  if (p1.missing(d) || p2.missing(d)) return 0;
  switch (d) {
    case Dimension::organization:
      return share_any(p1.organizations, p2.organizations) ? -1 : 1;
    case Dimension::geographical:
      return *p1.region == *p2.region ? -1 : 1;
    case Dimension::seniority:
      return *p1.seniority == *p2.seniority ? -1 : 1;
    case Dimension::topical:
      return topical_similarity(*p1.topics, *p2.topics) >= thresholds.topical_similarity ? -1 : 1;
    case Dimension::coauthorship:
      return *coauthor_distance(p1, p2) <= 2 ? -1 : 1;
  }
  throw ConfigError("unknown diversity dimension");
}

std::optional<std::size_t> TreatmentTable::find(std::size_t submission, std::size_t r1, std::size_t r2) const {
  const auto it = index_.find({submission, std::min(r1, r2), std::max(r1, r2)});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TreatmentTable::delta(std::size_t submission, std::size_t r1, std::size_t r2, Dimension d) const {
  const auto idx = find(submission, r1, r2);
  if (!idx) throw DataError("no treatment recorded for reviewer pair");
  return pairs[*idx].delta[index_of(d)];
}

void TreatmentTable::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    index_[{p.submission, std::min(p.first, p.second), std::max(p.first, p.second)}] = i;
  }
}

std::optional<double> median_h_index(const ReviewCorpus& corpus) {
  std::vector<double> h;
  for (const auto& r : corpus.reviewers) {
    if (r.h_index) h.push_back(static_cast<double>(*r.h_index));
  }
  if (h.empty()) return std::nullopt;
  return percentile(std::move(h), 50.0);
}

std::optional<double> median_topical_similarity(const ReviewCorpus& corpus,
                                                const std::vector<std::optional<Eigen::VectorXd>>& topics) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<double> sims;
  for (const auto& s : corpus.submissions) {
    for (std::size_t i = 0; i < s.reviewers.size(); ++i) {
      for (std::size_t j = i + 1; j < s.reviewers.size(); ++j) {
        const auto a = std::min(s.reviewers[i], s.reviewers[j]);
        const auto b = std::max(s.reviewers[i], s.reviewers[j]);
        if (!topics.at(a) || !topics.at(b) || !seen.insert({a, b}).second) continue;
        sims.push_back(topical_similarity(*topics[a], *topics[b]));
      }
    }
  }
  if (sims.empty()) return std::nullopt;
  return percentile(std::move(sims), 50.0);
}

TreatmentTable compute_treatments(const ReviewCorpus& corpus,
                                  const std::vector<std::optional<Eigen::VectorXd>>& topics,
                                  const Thresholds& overrides) {
  if (topics.size() != corpus.reviewers.size()) {
    throw DataError("topic vectors supplied for " + std::to_string(topics.size()) + " of " +
                    std::to_string(corpus.reviewers.size()) + " reviewers");
  }
  TreatmentTable table;
  auto& th = table.thresholds;
  if (overrides.h_index) {
    th.h_index = *overrides.h_index;
  } else if (auto m = median_h_index(corpus)) {
    th.h_index = *m;
    th.h_index_from_corpus = true;
  }
  if (overrides.topical_similarity) {
    th.topical_similarity = *overrides.topical_similarity;
  } else if (auto m = median_topical_similarity(corpus, topics)) {
    th.topical_similarity = *m;
    th.topical_from_corpus = true;
  }

  table.profiles.reserve(corpus.reviewers.size());
  for (std::size_t r = 0; r < corpus.reviewers.size(); ++r) {
    table.profiles.push_back(build_profile_vectors(corpus.reviewers[r], corpus.person_of(r), th.h_index, topics[r]));
  }

  for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
    const auto& slate = corpus.submissions[s].reviewers;
    for (std::size_t i = 0; i < slate.size(); ++i) {
      for (std::size_t j = i + 1; j < slate.size(); ++j) {
        const auto& p1 = table.profiles[slate[i]];
        const auto& p2 = table.profiles[slate[j]];
        PairTreatment t;
        t.submission = s;
        t.first = slate[i];
        t.second = slate[j];
        for (auto d : kAllDimensions) t.delta[index_of(d)] = pair_diversity(p1, p2, d, th);
        if (p1.topics && p2.topics) t.similarity = topical_similarity(*p1.topics, *p2.topics);
        t.distance = coauthor_distance(p1, p2);
        table.pairs.push_back(std::move(t));
      }
    }
  }
  table.reindex();
  return table;
}

}  // namespace slatelens
