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

#include "slatelens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"
#include "slatelens/semantic.hpp"

namespace slatelens {
using nlohmann::json;

namespace {

constexpr int kFillersPerSentence = 14;
constexpr int kTopicWords = 60;
constexpr int kCommonWords = 100;
constexpr std::uint64_t kAbstractWords = 400;
constexpr double kCommunityFillerShare = 0.3;

// Stream ids for derive_seed; each part of the generator draws from its own
// stream so that changing one part leaves the others untouched.
enum Stream : std::uint64_t {
  kPeople = 1,
  kSubmissions = 2,
  kOutcomeModel = 3,
  kRealize = 0x10000000,
  kNoise = 0x20000000,
};

std::string numbered(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

int weighted_pick(Rng& rng, const std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

Eigen::VectorXd concentrated_mixture(Rng& rng, int n, int own, double own_mass, double spread) {
  Eigen::VectorXd v(n);
  for (int c = 0; c < n; ++c) v[c] = rng.gamma(spread) + (c == own ? own_mass : 0.0);
  return v / v.sum();
}

// Least-squares per-reviewer amounts x_i with x_i + x_j ~ target_ij.
std::vector<double> split_pair_targets(std::size_t k, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                       const std::vector<double>& target) {
  if (k == 2) return {target[0] / 2.0, target[0] / 2.0};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(pairs[p].first);
    const auto j = static_cast<Eigen::Index>(pairs[p].second);
    m(i, i) += 1;
    m(j, j) += 1;
    m(i, j) += 1;
    m(j, i) += 1;
    b[i] += target[p];
    b[j] += target[p];
  }
  const Eigen::VectorXd x = m.ldlt().solve(b);
  return {x.data(), x.data() + x.size()};
}

// Stochastically rounded non-negative counts with a cap on their sum.
std::vector<int> realize_counts(const std::vector<double>& x, int cap, Rng& rng) {
  std::vector<int> out;
  for (double v : x) out.push_back(static_cast<int>(rng.stochastic_round(std::max(0.0, v))));
  auto total = std::accumulate(out.begin(), out.end(), 0);
  while (total > cap) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --total;
  }
  return out;
}

struct TrueReviewer {
  int community = 0;
  Eigen::VectorXd theta;
};

class SentenceMaker {
 public:
  SentenceMaker(const SynthConfig& c) : config_(c) {}

  // Abstract sentences (abstract >= 0) draw their fillers from words private
  // to that submission.
  std::string make(Rng& rng, int aspect, int argument, int community, long abstract = -1) const {
    const auto& asp = FallbackAnnotator::keywords(TypeChannel::aspect)[static_cast<std::size_t>(aspect)];
    const auto& arg = FallbackAnnotator::keywords(TypeChannel::argument)[static_cast<std::size_t>(argument)];
    std::string s = asp[rng.below(asp.size())];
    s += ' ';
    s += arg[rng.below(arg.size())];
    for (int f = 0; f < kFillersPerSentence; ++f) {
      s += ' ';
      if (abstract >= 0) {
        s += "a" + std::to_string(abstract) + "x" + std::to_string(rng.below(kAbstractWords));
      } else if (rng.bernoulli(kCommunityFillerShare)) {
        s += "f" + std::to_string(community) + "x" + std::to_string(rng.below(static_cast<std::uint64_t>(config_.community_filler_words)));
      } else {
        s += "g" + std::to_string(rng.below(static_cast<std::uint64_t>(config_.filler_vocabulary)));
      }
    }
    s += '.';
    return s;
  }

 private:
  const SynthConfig& config_;
};

void validate(const SynthConfig& c) {
  auto bad = [](const std::string& what) { throw ConfigError("synth: " + what); };
  if (c.n_submissions < 1) bad("n_submissions must be positive");
  if (c.n_communities < 1 || c.n_organizations < 1) bad("n_communities and n_organizations must be positive");
  double wsum = 0.0;
  for (double w : c.reviewers_per_paper) {
    if (!(w >= 0.0) || !std::isfinite(w)) bad("reviewers_per_paper weights must be non-negative");
    wsum += w;
  }
  if (!(wsum > 0.0)) bad("reviewers_per_paper weights sum to zero");
  int max_k = 2;
  for (int k = 0; k < 3; ++k) {
    if (c.reviewers_per_paper[static_cast<std::size_t>(k)] > 0.0) max_k = k + 2;
  }
  if (c.n_reviewers < max_k) bad("reviewers_per_paper exceeds n_reviewers");
  if (c.filler_vocabulary < 10 || c.community_filler_words < 10) bad("filler vocabularies are too small");
  if (c.coverage_capacity < 1 || c.redundancy_capacity < 1 || c.review_base_sentences < 8) bad("capacities too small");
  if (c.publications_per_reviewer < 1 || c.publication_tokens < 1) bad("publication sizes must be positive");
  if (!(c.noise_sd >= 0.0) || !std::isfinite(c.assignment_temperature)) bad("noise_sd must be non-negative");
  for (double r : {c.missing.organization, c.missing.location, c.missing.h_index, c.missing.coauthors,
                   c.missing.abstracts, c.missing.expertise, c.meta_rating_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) bad("rates must lie in [0, 1]");
  }
  for (const auto& p : c.planted) {
    if (!std::isfinite(p.gamma)) bad("planted gamma must be finite");
  }
}

}  // namespace

Channel channel_of(Measure m) noexcept {
  switch (m) {
    case Measure::argument_coverage: return Channel::argument_types;
    case Measure::aspect_coverage: return Channel::aspect_types;
    case Measure::lexical_coverage:
    case Measure::semantic_coverage: return Channel::paper_coverage;
    default: return Channel::redundancy;
  }
}

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::paper_coverage: return "paper_coverage";
    case Channel::argument_types: return "argument_types";
    case Channel::aspect_types: return "aspect_types";
    case Channel::redundancy: return "redundancy";
  }
  return "unknown";
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.n_submissions = j.value("n_submissions", c.n_submissions);
    if (j.contains("reviewers_per_paper")) {
      const auto& r = j.at("reviewers_per_paper");
      c.reviewers_per_paper = {r.value("2", 0.0), r.value("3", 0.0), r.value("4", 0.0)};
    }
    c.n_reviewers = j.value("n_reviewers", c.n_reviewers);
    c.n_organizations = j.value("n_organizations", c.n_organizations);
    c.n_communities = j.value("n_communities", c.n_communities);
    c.filler_vocabulary = j.value("filler_vocabulary", c.filler_vocabulary);
    c.community_filler_words = j.value("community_filler_words", c.community_filler_words);
    c.coverage_capacity = j.value("coverage_capacity", c.coverage_capacity);
    c.redundancy_capacity = j.value("redundancy_capacity", c.redundancy_capacity);
    c.review_base_sentences = j.value("review_base_sentences", c.review_base_sentences);
    c.publications_per_reviewer = j.value("publications_per_reviewer", c.publications_per_reviewer);
    c.publication_tokens = j.value("publication_tokens", c.publication_tokens);
    c.assignment_temperature = j.value("assignment_temperature", c.assignment_temperature);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    if (j.contains("base")) {
      for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
        c.base[ch] = j.at("base").value(std::string(to_string(static_cast<Channel>(ch))), c.base[ch]);
      }
    }
    if (j.contains("confounding")) {
      const auto& k = j.at("confounding");
      c.confounding.expertise_outcome = k.value("expertise_outcome", c.confounding.expertise_outcome);
      c.confounding.profile_outcome = k.value("profile_outcome", c.confounding.profile_outcome);
      c.confounding.profile_treatment = k.value("profile_treatment", c.confounding.profile_treatment);
    }
    if (j.contains("missing")) {
      const auto& m = j.at("missing");
      c.missing.organization = m.value("organization", c.missing.organization);
      c.missing.location = m.value("location", c.missing.location);
      c.missing.h_index = m.value("h_index", c.missing.h_index);
      c.missing.coauthors = m.value("coauthors", c.missing.coauthors);
      c.missing.abstracts = m.value("abstracts", c.missing.abstracts);
      c.missing.expertise = m.value("expertise", c.missing.expertise);
    }
    c.meta_rating_rate = j.value("meta_rating_rate", c.meta_rating_rate);
    c.calibration_reference = j.value("calibration_reference", c.calibration_reference);
    if (j.contains("planted")) {
      for (const auto& p : j.at("planted")) {
        const auto d = parse_dimension(p.at("dimension").get<std::string>());
        const auto m = parse_measure(p.at("outcome").get<std::string>());
        if (!d) throw ConfigError("synth: unknown dimension " + p.at("dimension").get<std::string>());
        if (!m) throw ConfigError("synth: unknown outcome " + p.at("outcome").get<std::string>());
        c.planted.push_back({*d, *m, p.at("gamma").get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  return c;
}

json to_json(const SynthConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["n_submissions"] = c.n_submissions;
  j["reviewers_per_paper"] = {{"2", c.reviewers_per_paper[0]}, {"3", c.reviewers_per_paper[1]}, {"4", c.reviewers_per_paper[2]}};
  j["n_reviewers"] = c.n_reviewers;
  j["n_organizations"] = c.n_organizations;
  j["n_communities"] = c.n_communities;
  j["filler_vocabulary"] = c.filler_vocabulary;
  j["community_filler_words"] = c.community_filler_words;
  j["coverage_capacity"] = c.coverage_capacity;
  j["redundancy_capacity"] = c.redundancy_capacity;
  j["review_base_sentences"] = c.review_base_sentences;
  j["publications_per_reviewer"] = c.publications_per_reviewer;
  j["publication_tokens"] = c.publication_tokens;
  j["assignment_temperature"] = c.assignment_temperature;
  j["noise_sd"] = c.noise_sd;
  json base;
  for (std::size_t ch = 0; ch < kChannelCount; ++ch) base[std::string(to_string(static_cast<Channel>(ch)))] = c.base[ch];
  j["base"] = base;
  j["confounding"] = {{"expertise_outcome", c.confounding.expertise_outcome},
                      {"profile_outcome", c.confounding.profile_outcome},
                      {"profile_treatment", c.confounding.profile_treatment}};
  j["missing"] = {{"organization", c.missing.organization}, {"location", c.missing.location},
                  {"h_index", c.missing.h_index},           {"coauthors", c.missing.coauthors},
                  {"abstracts", c.missing.abstracts},       {"expertise", c.missing.expertise}};
  j["meta_rating_rate"] = c.meta_rating_rate;
  j["calibration_reference"] = c.calibration_reference;
  json planted = json::array();
  for (const auto& p : c.planted) {
    planted.push_back({{"dimension", to_string(p.dimension)}, {"outcome", to_string(p.outcome)}, {"gamma", p.gamma}});
  }
  j["planted"] = planted;
  return j;
}

SynthGenerator::SynthGenerator(SynthConfig config) : config_(std::move(config)) {
  auto initial = std::move(config_.planted);
  config_.planted.clear();
  for (const auto& p : initial) plant_effect(p.dimension, p.outcome, p.gamma);
}

void SynthGenerator::plant_effect(Dimension d, Measure m, double gamma) {
  if (index_of(d) >= kDimensionCount) throw ConfigError("plant_effect: unknown dimension");
  if (index_of(m) >= kMeasureCount) throw ConfigError("plant_effect: unknown outcome");
  if (!std::isfinite(gamma)) throw ConfigError("plant_effect: gamma must be finite");
  for (auto& p : planted_) {
    if (p.dimension == d && p.outcome == m) {
      p.gamma += gamma;
      return;
    }
  }
  planted_.push_back({d, m, gamma});
}

SynthOutput generate_corpus(const SynthConfig& config) { return SynthGenerator(config).generate(); }

SynthOutput SynthGenerator::generate() const {
  const auto& c = config_;
  validate(c);
  const int nc = c.n_communities;
  const auto region_defaults = RegionMap::defaults();
  std::vector<std::string> countries;
  for (const auto& [country, region] : region_defaults.country_to_region) countries.push_back(country);

  // People, organizations and co-authorship.
  Rng people(derive_seed(c.seed, kPeople));
  std::vector<int> org_community(static_cast<std::size_t>(c.n_organizations));
  std::vector<std::string> org_country(static_cast<std::size_t>(c.n_organizations));
  for (int o = 0; o < c.n_organizations; ++o) {
    org_community[static_cast<std::size_t>(o)] = o % nc;
    org_country[static_cast<std::size_t>(o)] = countries[people.below(countries.size())];
  }
  std::vector<std::vector<int>> community_orgs(static_cast<std::size_t>(nc));
  for (int o = 0; o < c.n_organizations; ++o) community_orgs[static_cast<std::size_t>(o % nc)].push_back(o);

  const auto nr = static_cast<std::size_t>(c.n_reviewers);
  std::vector<TrueReviewer> truth(nr);
  RawCorpus raw;
  raw.reviewers.resize(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    auto& t = truth[r];
    t.community = static_cast<int>(people.below(static_cast<std::uint64_t>(nc)));
    t.theta = concentrated_mixture(people, nc, t.community, 1.5, 0.2);
    auto& rec = raw.reviewers[r];
    rec.id = numbered("r", static_cast<int>(r), 5);
    const auto& own = community_orgs[static_cast<std::size_t>(t.community)];
    int org = (!own.empty() && people.bernoulli(0.8)) ? own[people.below(own.size())]
                                                      : static_cast<int>(people.below(static_cast<std::uint64_t>(c.n_organizations)));
    rec.organizations.push_back(numbered("org-", org, 3));
    if (people.bernoulli(0.1)) {
      rec.organizations.push_back(numbered("org-", static_cast<int>(people.below(static_cast<std::uint64_t>(c.n_organizations))), 3));
    }
    rec.country = people.bernoulli(0.8) ? org_country[static_cast<std::size_t>(org)] : countries[people.below(countries.size())];
    rec.h_index = static_cast<int>(std::lround(22.0 * std::exp(0.6 * people.normal())));
  }

  const int n_external = 2 * c.n_reviewers;
  std::vector<std::vector<std::string>> pools(static_cast<std::size_t>(nc));
  for (std::size_t r = 0; r < nr; ++r) pools[static_cast<std::size_t>(truth[r].community)].push_back(raw.reviewers[r].id);
  for (int x = 0; x < n_external; ++x) pools[static_cast<std::size_t>(x % nc)].push_back(numbered("x", x, 5));
  std::vector<std::vector<double>> pool_weights(static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) {
    auto& pool = pools[static_cast<std::size_t>(k)];
    shuffle(pool, people);
    for (std::size_t i = 0; i < pool.size(); ++i) pool_weights[static_cast<std::size_t>(k)].push_back(1.0 / static_cast<double>(i + 1));
  }
  for (std::size_t r = 0; r < nr; ++r) {
    const int count = 3 + static_cast<int>(people.below(6));
    std::vector<std::string> co;
    for (int i = 0; i < count; ++i) {
      int k = truth[r].community;
      if (!people.bernoulli(0.85)) k = static_cast<int>(people.below(static_cast<std::uint64_t>(nc)));
      const auto& pool = pools[static_cast<std::size_t>(k)];
      if (pool.empty()) continue;
      const auto& name = pool[static_cast<std::size_t>(weighted_pick(people, pool_weights[static_cast<std::size_t>(k)]))];
      if (name != raw.reviewers[r].id && std::find(co.begin(), co.end(), name) == co.end()) co.push_back(name);
    }
    raw.reviewers[r].coauthors = std::move(co);
  }

  // Publication abstracts drawn from the reviewer's topic mixture.
  static const std::vector<std::string> kStop = {"the", "of", "and", "in", "for", "we", "a", "to"};
  std::vector<double> zipf(kTopicWords);
  for (int w = 0; w < kTopicWords; ++w) zipf[static_cast<std::size_t>(w)] = 1.0 / (w + 1.0);
  for (std::size_t r = 0; r < nr; ++r) {
    std::vector<double> theta(truth[r].theta.data(), truth[r].theta.data() + nc);
    std::vector<std::string> docs;
    for (int p = 0; p < c.publications_per_reviewer; ++p) {
      std::string doc;
      for (int t = 0; t < c.publication_tokens; ++t) {
        if (!doc.empty()) doc += ' ';
        const double u = people.uniform();
        if (u < 0.1) {
          doc += kStop[people.below(kStop.size())];
        } else if (u < 0.25) {
          doc += "c" + std::to_string(people.below(kCommonWords));
        } else {
          const int z = weighted_pick(people, theta);
          doc += "t" + std::to_string(z) + "w" + std::to_string(weighted_pick(people, zipf));
        }
      }
      docs.push_back(doc + ".");
    }
    raw.reviewers[r].abstracts = std::move(docs);
  }

  // Missing profile fields.
  for (auto& rec : raw.reviewers) {
    if (people.bernoulli(c.missing.organization)) rec.organizations.clear();
    if (people.bernoulli(c.missing.location)) rec.country.reset();
    if (people.bernoulli(c.missing.h_index)) rec.h_index.reset();
    if (people.bernoulli(c.missing.coauthors)) rec.coauthors.reset();
    if (people.bernoulli(c.missing.abstracts)) rec.abstracts.reset();
  }

  // Submissions and expertise-driven assignment.
  Rng subs(derive_seed(c.seed, kSubmissions));
  const auto ns = static_cast<std::size_t>(c.n_submissions);
  const std::vector<double> k_weights(c.reviewers_per_paper.begin(), c.reviewers_per_paper.end());
  const double tau = c.assignment_temperature * c.confounding.profile_treatment;
  std::vector<int> sub_community(ns);
  std::vector<std::vector<double>> true_expertise(ns);
  raw.submissions.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    sub_community[s] = static_cast<int>(subs.below(static_cast<std::uint64_t>(nc)));
    const Eigen::VectorXd phi = concentrated_mixture(subs, nc, sub_community[s], 3.0, 0.2);
    const int k = 2 + weighted_pick(subs, k_weights);
    std::vector<std::pair<double, std::size_t>> keys(nr);
    std::vector<double> e(nr);
    for (std::size_t r = 0; r < nr; ++r) {
      e[r] = std::clamp(truth[r].theta.dot(phi) + 0.03 * subs.normal(), 0.0, 1.0);
      double u = subs.uniform();
      while (u <= 0.0) u = subs.uniform();
      keys[r] = {-(tau * e[r] - std::log(-std::log(u))), r};  // Gumbel top-k
    }
    std::partial_sort(keys.begin(), keys.begin() + k, keys.end());
    raw.submissions[s].id = numbered("s", static_cast<int>(s), 5);
    raw.submissions[s].abstract = "placeholder.";
    for (int i = 0; i < k; ++i) {
      const auto r = keys[static_cast<std::size_t>(i)].second;
      true_expertise[s].push_back(e[r]);
      std::optional<double> observed = e[r];
      if (subs.bernoulli(c.missing.expertise)) observed.reset();
      raw.assignments.push_back({raw.submissions[s].id, raw.reviewers[r].id, observed});
    }
  }

  // Treatments as the analysis sees them, except that topical diversity uses
  // the true topic mixtures of reviewers whose publications are observed.
  const auto skeleton = build_corpus(raw);
  std::vector<std::optional<Eigen::VectorXd>> topics(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    if (raw.reviewers[r].abstracts) topics[r] = truth[r].theta;
  }
  const auto table = compute_treatments(skeleton, topics, {});

  // Outcome model: per-channel partner effects from expertise and observed
  // profile fields, plus the planted treatment coefficients.
  Rng model(derive_seed(c.seed, kOutcomeModel));
  struct ChannelModel {
    double senior = 0.0;
    std::vector<double> region;
    std::vector<double> org;
    std::array<double, kDimensionCount> gamma{};
  };
  std::array<ChannelModel, kChannelCount> channels;
  for (auto& ch : channels) {
    ch.senior = c.confounding.profile_outcome * model.normal();
    for (std::size_t i = 0; i < kRegionCount; ++i) ch.region.push_back(c.confounding.profile_outcome * model.normal());
    for (std::size_t i = 0; i < skeleton.organizations.size(); ++i) ch.org.push_back(c.confounding.profile_outcome * model.normal());
  }
  for (const auto& p : planted_) channels[static_cast<std::size_t>(channel_of(p.outcome))].gamma[index_of(p.dimension)] += p.gamma;
  double mean_expertise = 0.0;
  std::size_t n_assign = 0;
  for (const auto& v : true_expertise) {
    for (double e : v) {
      mean_expertise += e;
      ++n_assign;
    }
  }
  mean_expertise /= static_cast<double>(std::max<std::size_t>(n_assign, 1));

  auto partner_effect = [&](const ChannelModel& ch, std::size_t r, double expertise) {
    const auto& p = table.profiles[r];
    double a = c.confounding.expertise_outcome * (expertise - mean_expertise);
    if (p.seniority && *p.seniority == 1) a += ch.senior;
    if (p.region) a += ch.region[static_cast<std::size_t>(*p.region)];
    if (!p.organizations.empty()) {
      double o = 0.0;
      for (int id : p.organizations) o += ch.org[static_cast<std::size_t>(id)];
      a += o / static_cast<double>(p.organizations.size());
    }
    return a;
  };

  // Text realization.
  std::vector<PairLatent> latents;
  const SentenceMaker maker(c);
  const int abstract_size = 2 * c.coverage_capacity + 2;
  const auto n_aspects = static_cast<int>(kAspectCount);
  const auto n_arguments = static_cast<int>(kArgumentCount);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& slate = skeleton.submissions[s].reviewers;
    const auto k = slate.size();
    Rng rng(derive_seed(c.seed, kRealize + s));
    Rng noise(derive_seed(c.seed, kNoise + s));
    const int community = sub_community[s];

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    }
    std::array<std::vector<double>, kChannelCount> latent;
    for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
      for (const auto& [i, j] : pairs) {
        double y;
        if (c.calibration_reference) {
          y = noise.uniform();
        } else {
          const auto& cm = channels[ch];
          y = c.base[ch] + partner_effect(cm, slate[i], true_expertise[s][i]) +
              partner_effect(cm, slate[j], true_expertise[s][j]) + c.noise_sd * noise.normal();
          for (auto d : kAllDimensions) y += cm.gamma[index_of(d)] / 2.0 * table.delta(s, slate[i], slate[j], d);
        }
        latent[ch].push_back(std::clamp(y, 0.0, 1.0));
      }
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      PairLatent pl;
      pl.submission = s;
      pl.first = slate[pairs[p].first];
      pl.second = slate[pairs[p].second];
      for (std::size_t ch = 0; ch < kChannelCount; ++ch) pl.latent[ch] = latent[ch][p];
      for (auto d : kAllDimensions) pl.delta[index_of(d)] = table.delta(s, pl.first, pl.second, d);
      latents.push_back(pl);
    }

    // Redundancy: sentences shared by exactly one pair.
    std::vector<int> shared_count;
    for (double y : latent[static_cast<std::size_t>(Channel::redundancy)]) {
      shared_count.push_back(static_cast<int>(rng.stochastic_round(y * c.redundancy_capacity)));
    }
    // Paper coverage: abstract sentences copied by exactly one reviewer.
    std::vector<double> cov_target;
    for (double y : latent[static_cast<std::size_t>(Channel::paper_coverage)]) cov_target.push_back(y * c.coverage_capacity);
    const auto copies = realize_counts(split_pair_targets(k, pairs, cov_target), abstract_size, rng);
    // Type coverage: one common type plus exclusive types per reviewer.
    auto exclusive = [&](Channel ch, int n_types) {
      std::vector<double> target;
      for (double y : latent[static_cast<std::size_t>(ch)]) target.push_back(y * n_types - 1.0);
      return realize_counts(split_pair_targets(k, pairs, target), n_types - 1, rng);
    };
    const auto excl_arg = exclusive(Channel::argument_types, n_arguments);
    const auto excl_asp = exclusive(Channel::aspect_types, n_aspects);

    const int common_asp = static_cast<int>(rng.below(kAspectCount));
    const int common_arg = static_cast<int>(rng.below(kArgumentCount));
    auto deal_types = [&](int n_types, int common, const std::vector<int>& counts) {
      std::vector<int> rest;
      for (int t = 0; t < n_types; ++t) {
        if (t != common) rest.push_back(t);
      }
      shuffle(rest, rng);
      std::vector<std::vector<int>> sets(k);
      std::size_t next = 0;
      for (std::size_t i = 0; i < k; ++i) {
        sets[i].push_back(common);
        for (int e = 0; e < counts[i]; ++e) sets[i].push_back(rest[next++]);
      }
      return sets;
    };
    const auto asp_sets = deal_types(n_aspects, common_asp, excl_asp);
    const auto arg_sets = deal_types(n_arguments, common_arg, excl_arg);

    std::vector<std::string> abstract;
    for (int a = 0; a < abstract_size; ++a) abstract.push_back(maker.make(rng, common_asp, common_arg, community, static_cast<long>(s)));
    std::vector<int> abstract_order(static_cast<std::size_t>(abstract_size));
    std::iota(abstract_order.begin(), abstract_order.end(), 0);
    shuffle(abstract_order, rng);

    std::vector<std::vector<std::string>> texts(k);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      for (int n = 0; n < shared_count[p]; ++n) {
        const auto sentence = maker.make(rng, common_asp, common_arg, community);
        texts[pairs[p].first].push_back(sentence);
        texts[pairs[p].second].push_back(sentence);
      }
    }
    std::size_t next_abstract = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (int n = 0; n < copies[i]; ++n) texts[i].push_back(abstract[static_cast<std::size_t>(abstract_order[next_abstract++])]);
    }
    const int length = c.review_base_sentences + static_cast<int>(k - 1) * c.redundancy_capacity + c.coverage_capacity;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& asp = asp_sets[i];
      const auto& arg = arg_sets[i];
      const int fillers = std::max<int>(length - static_cast<int>(texts[i].size()),
                                        static_cast<int>(std::max(asp.size(), arg.size())));
      for (int f = 0; f < fillers; ++f) {
        const auto fu = static_cast<std::size_t>(f);
        const int a = fu < asp.size() ? asp[fu] : asp[rng.below(asp.size())];
        const int g = fu < arg.size() ? arg[fu] : arg[rng.below(arg.size())];
        texts[i].push_back(maker.make(rng, a, g, community));
      }
      shuffle(texts[i], rng);
    }

    std::string abstract_text;
    for (const auto& a : abstract) abstract_text += (abstract_text.empty() ? "" : "\n") + a;
    raw.submissions[s].abstract = abstract_text;
    for (std::size_t i = 0; i < k; ++i) {
      RawReview rv;
      rv.id = raw.submissions[s].id + "-" + raw.reviewers[slate[i]].id;
      rv.submission_id = raw.submissions[s].id;
      rv.reviewer_id = raw.reviewers[slate[i]].id;
      // Spread the sentences over the four review fields.
      std::array<std::string*, 4> fields{&rv.summary, &rv.strengths, &rv.weaknesses, &rv.comments};
      const auto& t = texts[i];
      for (std::size_t n = 0; n < t.size(); ++n) {
        auto& f = *fields[std::min<std::size_t>(3, n * 4 / t.size())];
        f += (f.empty() ? "" : "\n") + t[n];
      }
      rv.score = 1 + static_cast<int>(rng.below(10));
      if (rng.bernoulli(c.meta_rating_rate)) rv.meta_rating = 1 + static_cast<int>(rng.below(5));
      raw.reviews.push_back(std::move(rv));
    }
  }

  SynthOutput out;
  out.corpus = build_corpus(raw);
  out.raw = std::move(raw);
  out.latents = std::move(latents);

  json gt;
  gt["schema"] = "slate-lens/ground-truth/v1";
  gt["config"] = to_json(c);
  json planted = json::array();
  for (const auto& p : planted_) {
    planted.push_back({{"dimension", to_string(p.dimension)},
                       {"outcome", to_string(p.outcome)},
                       {"channel", to_string(channel_of(p.outcome))},
                       {"gamma", p.gamma}});
  }
  gt["planted"] = planted;
  json encoding;
  // Normalized change per unit latent change with the fallback annotator,
  // calibrated on a calibration_reference corpus of the same shape. The
  // self-check accepts |measured / gamma - gain| <= tolerance.
  static constexpr std::array<double, kMeasureCount> kGain{0.80, 0.78, 0.78, 0.77, 0.92, 0.83, 0.31, 0.35};
  for (auto m : kAllMeasures) {
    encoding[std::string(to_string(m))] = {
        {"channel", to_string(channel_of(m))}, {"gain", kGain[index_of(m)]}, {"tolerance", 0.15}};
  }
  gt["encoding"] = encoding;
  gt["thresholds"] = {{"h_index", table.thresholds.h_index}, {"topical_similarity", table.thresholds.topical_similarity}};
  gt["topical_treatment_uses_true_topics"] = true;
  json communities = json::array();
  for (const auto& t : truth) communities.push_back(t.community);
  gt["reviewer_communities"] = communities;
  out.ground_truth = std::move(gt);
  return out;
}

void write_synth(const SynthOutput& out, const std::filesystem::path& dir) {
  write_corpus(out.corpus, dir);
  std::ofstream f(dir / "ground_truth.json");
  if (!f) throw DataError("cannot write " + (dir / "ground_truth.json").string());
  f << out.ground_truth.dump(2) << '\n';
}

}  // namespace slatelens
