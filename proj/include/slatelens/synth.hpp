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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slatelens/corpus.hpp"
#include "slatelens/diversity.hpp"
#include "slatelens/measures.hpp"

namespace slatelens {

/// Latent outcome channels of the generator. Each measure is driven by one.
enum class Channel : std::size_t { paper_coverage, argument_types, aspect_types, redundancy };
inline constexpr std::size_t kChannelCount = 4;

Channel channel_of(Measure m) noexcept;
std::string_view to_string(Channel c) noexcept;

struct PlantedEffect {
  Dimension dimension = Dimension::organization;
  Measure outcome = Measure::argument_coverage;
  double gamma = 0.0;
};

struct MissingRates {
  double organization = 0.05;
  double location = 0.05;
  double h_index = 0.1;
  double coauthors = 0.1;
  double abstracts = 0.1;
  double expertise = 0.02;
};

struct Confounding {
  double expertise_outcome = 0.1;  // outcome shift per unit of partner expertise
  double profile_outcome = 0.03;   // scale of per-organization/region/seniority outcome shifts
  double profile_treatment = 1.0;  // multiplies the assignment temperature
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_submissions = 500;
  std::array<double, 3> reviewers_per_paper{0.1, 0.7, 0.2};  // weights of 2, 3, 4
  int n_reviewers = 300;
  int n_organizations = 60;
  int n_communities = 5;
  int filler_vocabulary = 3000;
  int community_filler_words = 200;
  int coverage_capacity = 8;    // abstract sentences a pair covers at latent 1
  int redundancy_capacity = 16;  // sentences a pair shares at latent 1
  int review_base_sentences = 8;
  int publications_per_reviewer = 3;
  int publication_tokens = 40;
  double assignment_temperature = 6.0;
  double noise_sd = 0.05;
  std::array<double, kChannelCount> base{0.35, 0.55, 0.55, 0.4};
  Confounding confounding;
  MissingRates missing;
  double meta_rating_rate = 0.8;
  bool calibration_reference = false;  // latents Uniform(0, 1), no planted effects or confounders
  std::vector<PlantedEffect> planted;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& c);

/// Latent outcome of one co-assigned pair as realized in the text.
struct PairLatent {
  std::size_t submission = 0;
  std::size_t first = 0;  // reviewer indices, slate order
  std::size_t second = 0;
  std::array<double, kChannelCount> latent{};  // clamped to [0, 1]
  std::array<int, kDimensionCount> delta{};
};

struct SynthOutput {
  RawCorpus raw;
  ReviewCorpus corpus;
  std::vector<PairLatent> latents;
  nlohmann::json ground_truth;
};

/// Seeded generator. Reviewers belong to research communities that shape
/// their organizations, co-author lists, publications and (through expertise)
/// their assignments. Pair outcomes are latent values
///   base + sum_d (gamma_d / 2) delta_d + a(r1) + a(r2) + noise
/// per channel, with a(r) built from partner expertise and observed profile
/// fields, and are written into the text: shared sentences for redundancy,
/// copied abstract sentences for paper coverage, sentence types for type
/// coverage.
class SynthGenerator {
 public:
  explicit SynthGenerator(SynthConfig config);

  /// Adds gamma to the cell; planting the same cell twice sums.
  void plant_effect(Dimension d, Measure m, double gamma);
  const std::vector<PlantedEffect>& planted() const noexcept { return planted_; }

  SynthOutput generate() const;

 private:
  SynthConfig config_;
  std::vector<PlantedEffect> planted_;
};

SynthOutput generate_corpus(const SynthConfig& config);

/// Writes the corpus files plus ground_truth.json.
void write_synth(const SynthOutput& out, const std::filesystem::path& dir);

}  // namespace slatelens
