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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slatelens/calibration.hpp"
#include "slatelens/causal.hpp"
#include "slatelens/diversity.hpp"
#include "slatelens/pair_measures.hpp"
#include "slatelens/topics.hpp"

namespace slatelens {

enum class AnnotationKind { fallback, sidecar };

struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;

  AnnotationKind annotations = AnnotationKind::fallback;
  std::filesystem::path annotations_path;  // sidecar only
  std::uint64_t fallback_seed = 0x5eed;
  std::size_t fallback_dim = kEmbeddingDim;

  // Calibration: a fitted table, or a reference corpus to fit one on. With
  // neither, the analysis corpus is its own reference.
  std::optional<std::filesystem::path> calibration_path;
  std::optional<std::filesystem::path> calibration_reference_dir;
  std::pair<double, double> percentiles{1.0, 99.0};

  Thresholds thresholds;

  bool topics_enabled = true;
  ReviewerTopicOptions topics;
  std::optional<std::filesystem::path> stop_words_path;

  EffectMatrixOptions causal;
  std::uint64_t seed = 1;
  int parallelism = 0;  // 0: all available threads
};

/// Parses and validates a config object. Relative paths are resolved against
/// `base_dir`. Throws ConfigError.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig read_pipeline_config(const std::filesystem::path& path);

/// Checks value ranges and cross-field consistency. Throws ConfigError.
void validate(const PipelineConfig& config);

/// The config as recorded in reports. Parallelism is left out so that the
/// report does not depend on it.
nlohmann::json to_json(const PipelineConfig& config);

std::unique_ptr<AnnotationSource> make_annotation_source(const PipelineConfig& config);

/// Raw measure values of every corpus pair keyed by ids, and back.
nlohmann::json pair_measures_to_json(const ReviewCorpus& corpus, const PairMeasureTable& table);
PairMeasureTable pair_measures_from_json(const ReviewCorpus& corpus, const nlohmann::json& j);

/// Raw values of each computed measure over a table's pairs.
std::map<Measure, std::vector<double>> measure_columns(const PairMeasureTable& table);

/// Normalized outcomes keyed by reviewer pair; measures the table did not
/// compute stay NaN.
OutcomeTable normalize_outcomes(const PairMeasureTable& table, const CalibrationTable& calibration);

/// Fits a calibration table on a reference corpus.
CalibrationTable calibrate_corpus(const ReviewCorpus& reference, const AnnotationSource& source,
                                  std::pair<double, double> percentiles, std::string name,
                                  const MeasureSet& want = kEveryMeasure);

/// Topic options with the config's seed and stop words applied.
ReviewerTopicOptions topic_options(const PipelineConfig& config);

struct Report {
  nlohmann::json effects;  // the effects.json document
  std::string table;       // rendered text
};

/// effects.json document for a finished effect matrix.
nlohmann::json effects_document(const PipelineConfig& config, const TreatmentTable& treatments,
                                const std::optional<TopicSelection>& topics, const EffectMatrix& matrix,
                                const std::vector<QualityCheck>& quality);

/// Renders one table per method present: rows are dimensions, columns are
/// the outcomes grouped Coverage | Redundancy plus a sample-size column.
/// Throws DataError when the document has no cells.
std::string render_table(const nlohmann::json& effects);

struct RunOptions {
  bool resume = false;
  bool quiet = false;
};

/// load -> topics -> diversity -> measures -> calibrate/normalize -> causal
/// -> report. Every stage leaves its artifact in output_dir; with resume,
/// stages whose artifact matches the current config are loaded instead of
/// recomputed. Errors carry the failing stage name and keep their type.
Report run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// Atomic text write (temporary file, then rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace slatelens
