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

#include "slatelens/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <type_traits>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"

namespace slatelens {
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json_file(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

std::uint64_t corpus_fingerprint(const fs::path& dir) {
  const auto paths = CorpusPaths::in_directory(dir);
  std::uint64_t h = 0;
  for (const auto& p : {paths.submissions, paths.reviews, paths.reviewers, paths.assignments}) {
    h = fnv1a64(read_file(p), h);
  }
  if (paths.regions) h = fnv1a64(read_file(*paths.regions), h);
  return h;
}

std::uint64_t fingerprint(const json& parts) { return fnv1a64(parts.dump()); }

// Runs one stage, prefixing its error with the stage name and keeping the
// error family.
template <typename F>
auto stage(const char* name, bool quiet, F&& f) -> decltype(f()) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      if (!quiet) std::clog << "[slate-lens] " << name << " done\n";
    } else {
      auto r = f();
      if (!quiet) {
        const std::chrono::duration<double> s = std::chrono::steady_clock::now() - start;
        std::clog << "[slate-lens] " << name << " done in " << std::fixed << std::setprecision(2) << s.count() << " s\n";
      }
      return r;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("stage ") + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("stage ") + name + ": " + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(std::string("stage ") + name + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string("stage ") + name + ": " + e.what());
  }
}

class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
      try {
        data_ = json::parse(read_file(path_));
      } catch (const json::exception&) {
        data_ = json::object();
      }
    }
    if (!data_.is_object()) data_ = json::object();
  }

  bool matches(const std::string& stage, std::uint64_t fp) const {
    return data_.contains(stage) && data_.at(stage).is_string() && data_.at(stage).get<std::string>() == hex(fp);
  }

  void record(const std::string& stage, std::uint64_t fp) {
    data_[stage] = hex(fp);
    write_text_file(path_, data_.dump(2) + "\n");
  }

  void forget(const std::string& stage) {
    if (data_.erase(stage) != 0) write_text_file(path_, data_.dump(2) + "\n");
  }

 private:
  fs::path path_;
  json data_;
};

json topics_config_json(const PipelineConfig& c) {
  json t;
  t["enabled"] = c.topics_enabled;
  t["k_grid"] = c.topics.k_grid;
  t["iterations"] = c.topics.lda.iterations;
  t["burn_in"] = c.topics.lda.burn_in;
  t["samples"] = c.topics.lda.samples;
  t["spacing"] = c.topics.lda.sample_spacing;
  t["alpha"] = c.topics.lda.alpha;
  t["beta"] = c.topics.lda.beta;
  t["inference_iterations"] = c.topics.inference.iterations;
  t["inference_burn_in"] = c.topics.inference.burn_in;
  t["inference_spacing"] = c.topics.inference.sample_spacing;
  t["top_m"] = c.topics.top_m;
  t["min_df"] = c.topics.min_df;
  t["stop_words"] = c.stop_words_path ? json(c.stop_words_path->string()) : json(nullptr);
  return t;
}

json thresholds_json(const Thresholds& t) {
  return {{"h_index", t.h_index ? json(*t.h_index) : json(nullptr)},
          {"topical_similarity", t.topical_similarity ? json(*t.topical_similarity) : json(nullptr)}};
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.corpus_dir = resolve(j.at("corpus_dir").get<std::string>(), base_dir);
    c.output_dir = resolve(get_or<std::string>(j, "output_dir", "slate-lens-out"), base_dir);

    if (j.contains("annotations")) {
      const auto& a = j.at("annotations");
      const auto source = get_or<std::string>(a, "source", "fallback");
      if (source == "fallback") {
        c.annotations = AnnotationKind::fallback;
      } else if (source == "sidecar") {
        c.annotations = AnnotationKind::sidecar;
        c.annotations_path = resolve(a.at("path").get<std::string>(), base_dir);
      } else {
        throw ConfigError("annotations.source must be fallback or sidecar, got " + source);
      }
      c.fallback_seed = get_or<std::uint64_t>(a, "fallback_seed", c.fallback_seed);
      c.fallback_dim = get_or<std::size_t>(a, "fallback_dim", c.fallback_dim);
    }

    if (j.contains("calibration")) {
      const auto& k = j.at("calibration");
      if (k.contains("path")) c.calibration_path = resolve(k.at("path").get<std::string>(), base_dir);
      if (k.contains("reference_dir")) {
        c.calibration_reference_dir = resolve(k.at("reference_dir").get<std::string>(), base_dir);
      }
      if (k.contains("percentiles")) {
        const auto p = k.at("percentiles").get<std::vector<double>>();
        if (p.size() != 2) throw ConfigError("calibration.percentiles must have two entries");
        c.percentiles = {p[0], p[1]};
      }
    }

    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      if (t.is_string()) {
        c.thresholds = read_thresholds(resolve(t.get<std::string>(), base_dir));
      } else {
        if (t.contains("h_index") && !t.at("h_index").is_null()) c.thresholds.h_index = t.at("h_index").get<double>();
        if (t.contains("topical_similarity") && !t.at("topical_similarity").is_null()) {
          c.thresholds.topical_similarity = t.at("topical_similarity").get<double>();
        }
      }
    }

    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.parallelism = get_or<int>(j, "parallelism", c.parallelism);

    if (j.contains("topics")) {
      const auto& t = j.at("topics");
      c.topics_enabled = get_or<bool>(t, "enabled", true);
      c.topics.k_grid = get_or<std::vector<int>>(t, "k_grid", c.topics.k_grid);
      c.topics.lda.iterations = get_or<int>(t, "iterations", c.topics.lda.iterations);
      c.topics.lda.burn_in = get_or<int>(t, "burn_in", c.topics.lda.burn_in);
      c.topics.lda.samples = get_or<int>(t, "samples", c.topics.lda.samples);
      c.topics.lda.sample_spacing = get_or<int>(t, "spacing", c.topics.lda.sample_spacing);
      c.topics.lda.alpha = get_or<double>(t, "alpha", c.topics.lda.alpha);
      c.topics.lda.beta = get_or<double>(t, "beta", c.topics.lda.beta);
      c.topics.inference.iterations = get_or<int>(t, "inference_iterations", c.topics.inference.iterations);
      c.topics.inference.burn_in = get_or<int>(t, "inference_burn_in", c.topics.inference.burn_in);
      c.topics.inference.sample_spacing = get_or<int>(t, "inference_spacing", c.topics.inference.sample_spacing);
      c.topics.top_m = get_or<int>(t, "top_m", c.topics.top_m);
      c.topics.min_df = get_or<int>(t, "min_df", c.topics.min_df);
      if (t.contains("stop_words") && !t.at("stop_words").is_null()) {
        c.stop_words_path = resolve(t.at("stop_words").get<std::string>(), base_dir);
      }
    }

    if (j.contains("causal")) {
      const auto& k = j.at("causal");
      auto& o = c.causal;
      if (k.contains("triple_policy")) {
        const auto s = k.at("triple_policy").get<std::string>();
        const auto p = parse_triple_policy(s);
        if (!p) throw ConfigError("unknown triple_policy " + s);
        o.policy = *p;
      }
      o.min_triples = get_or<std::size_t>(k, "min_triples", o.min_triples);
      o.min_residual_dof = get_or<std::size_t>(k, "min_residual_dof", o.min_residual_dof);
      o.caliper = get_or<double>(k, "caliper", o.caliper);
      o.l2 = get_or<double>(k, "l2", o.l2);
      o.permutations = get_or<std::int64_t>(k, "permutations", o.permutations);
      o.fdr = get_or<double>(k, "fdr", o.fdr);
      o.significance = get_or<double>(k, "significance", o.significance);
      if (k.contains("method")) {
        const auto s = k.at("method").get<std::string>();
        if (s == "both") {
          o.parametric = o.nonparametric = true;
        } else if (const auto m = parse_method(s)) {
          o.parametric = *m == Method::parametric;
          o.nonparametric = *m == Method::nonparametric;
        } else {
          throw ConfigError("method must be parametric, nonparametric or both, got " + s);
        }
      }
      if (k.contains("dimensions")) {
        o.dimensions.clear();
        for (const auto& s : k.at("dimensions").get<std::vector<std::string>>()) {
          const auto d = parse_dimension(s);
          if (!d) throw ConfigError("unknown dimension " + s);
          o.dimensions.push_back(*d);
        }
      }
      if (k.contains("outcomes")) {
        o.outcomes.clear();
        for (const auto& s : k.at("outcomes").get<std::vector<std::string>>()) {
          const auto m = parse_measure(s);
          if (!m) throw ConfigError("unknown outcome " + s);
          o.outcomes.push_back(*m);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.causal.seed = c.seed;
  c.topics.lda.seed = c.seed;
  validate(c);
  return c;
}

PipelineConfig read_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

void validate(const PipelineConfig& c) {
  auto bad = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (c.corpus_dir.empty()) bad("corpus_dir is required");
  if (c.output_dir.empty()) bad("output_dir is required");
  if (c.annotations == AnnotationKind::sidecar && c.annotations_path.empty()) bad("sidecar annotations need a path");
  if (c.fallback_dim == 0) bad("fallback_dim must be positive");
  if (c.calibration_path && c.calibration_reference_dir) bad("give calibration.path or calibration.reference_dir, not both");
  const auto [lo, hi] = c.percentiles;
  if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) bad("calibration.percentiles must satisfy 0 <= lo < hi <= 100");
  if (c.thresholds.h_index && !std::isfinite(*c.thresholds.h_index)) bad("thresholds.h_index must be finite");
  if (c.thresholds.topical_similarity && !std::isfinite(*c.thresholds.topical_similarity)) {
    bad("thresholds.topical_similarity must be finite");
  }
  if (c.topics_enabled) {
    if (c.topics.k_grid.empty()) bad("topics.k_grid is empty");
    for (int k : c.topics.k_grid) {
      if (k < 2) bad("topics.k_grid entries must be at least 2");
    }
    const auto& l = c.topics.lda;
    if (l.iterations < 1 || l.burn_in < 0 || l.burn_in >= l.iterations) bad("topics: need 0 <= burn_in < iterations");
    if (l.samples < 1 || l.sample_spacing < 1) bad("topics: samples and spacing must be positive");
    if (!(l.beta > 0.0)) bad("topics.beta must be positive");
    const auto& inf = c.topics.inference;
    if (inf.iterations < 1 || inf.burn_in < 0 || inf.burn_in >= inf.iterations || inf.sample_spacing < 1) {
      bad("topics: invalid inference schedule");
    }
    if (c.topics.top_m < 2) bad("topics.top_m must be at least 2");
    if (c.topics.min_df < 1) bad("topics.min_df must be at least 1");
  }
  const auto& o = c.causal;
  if (!o.parametric && !o.nonparametric) bad("no estimation method selected");
  if (o.dimensions.empty() || o.outcomes.empty()) bad("dimensions and outcomes must be non-empty");
  if (o.min_triples < 2) bad("causal.min_triples must be at least 2");
  if (o.min_residual_dof < 1) bad("causal.min_residual_dof must be at least 1");
  if (!(o.caliper > 0.0 && o.caliper <= 1.0)) bad("causal.caliper must lie in (0, 1]");
  if (!(o.l2 >= 0.0)) bad("causal.l2 must be non-negative");
  if (o.permutations < 1) bad("causal.permutations must be positive");
  if (!(o.fdr > 0.0 && o.fdr < 1.0)) bad("causal.fdr must lie in (0, 1)");
  if (!(o.significance > 0.0 && o.significance < 1.0)) bad("causal.significance must lie in (0, 1)");
  if (c.parallelism < 0) bad("parallelism must be non-negative");
}

json to_json(const PipelineConfig& c) {
  json j;
  j["corpus_dir"] = c.corpus_dir.string();
  j["output_dir"] = c.output_dir.string();
  json a;
  a["source"] = c.annotations == AnnotationKind::fallback ? "fallback" : "sidecar";
  if (c.annotations == AnnotationKind::sidecar) a["path"] = c.annotations_path.string();
  a["fallback_seed"] = c.fallback_seed;
  a["fallback_dim"] = c.fallback_dim;
  j["annotations"] = a;
  json k;
  if (c.calibration_path) k["path"] = c.calibration_path->string();
  if (c.calibration_reference_dir) k["reference_dir"] = c.calibration_reference_dir->string();
  k["percentiles"] = {c.percentiles.first, c.percentiles.second};
  j["calibration"] = k;
  j["thresholds"] = thresholds_json(c.thresholds);
  j["topics"] = topics_config_json(c);
  const auto& o = c.causal;
  json causal;
  causal["triple_policy"] = to_string(o.policy);
  causal["min_triples"] = o.min_triples;
  causal["min_residual_dof"] = o.min_residual_dof;
  causal["caliper"] = o.caliper;
  causal["l2"] = o.l2;
  causal["permutations"] = o.permutations;
  causal["fdr"] = o.fdr;
  causal["significance"] = o.significance;
  causal["method"] = o.parametric && o.nonparametric ? "both" : (o.parametric ? "parametric" : "nonparametric");
  json dims = json::array();
  for (auto d : o.dimensions) dims.push_back(to_string(d));
  json outs = json::array();
  for (auto m : o.outcomes) outs.push_back(to_string(m));
  causal["dimensions"] = dims;
  causal["outcomes"] = outs;
  j["causal"] = causal;
  j["seed"] = c.seed;
  return j;
}

std::unique_ptr<AnnotationSource> make_annotation_source(const PipelineConfig& config) {
  if (config.annotations == AnnotationKind::fallback) {
    return std::make_unique<FallbackSource>(FallbackAnnotator(config.fallback_seed, config.fallback_dim));
  }
  if (!fs::exists(config.annotations_path)) {
    throw DataError("annotations file not found: " + config.annotations_path.string());
  }
  return std::make_unique<BundleSource>(std::make_shared<const AnnotationBundle>(read_annotations(config.annotations_path)));
}

json pair_measures_to_json(const ReviewCorpus& corpus, const PairMeasureTable& table) {
  json rows = json::array();
  json measures = json::array();
  for (auto m : kAllMeasures) {
    if (table.measures[index_of(m)]) measures.push_back(to_string(m));
  }
  for (std::size_t i = 0; i < table.keys.size(); ++i) {
    const auto& k = table.keys[i];
    json values = json::object();
    for (auto m : kAllMeasures) {
      if (table.measures[index_of(m)]) values[std::string(to_string(m))] = table.values[i][index_of(m)];
    }
    rows.push_back({{"submission", corpus.submissions[k.submission].id},
                    {"first", corpus.reviewers[k.first].id},
                    {"second", corpus.reviewers[k.second].id},
                    {"values", values}});
  }
  return {{"schema", "slate-lens/pair-measures/v1"}, {"measures", measures}, {"pairs", rows}};
}

PairMeasureTable pair_measures_from_json(const ReviewCorpus& corpus, const json& j) {
  PairMeasureTable t;
  try {
    t.measures = {};
    for (const auto& id : j.at("measures")) {
      const auto m = parse_measure(id.get<std::string>());
      if (!m) throw DataError("pair measures: unknown measure " + id.get<std::string>());
      t.measures[index_of(*m)] = true;
    }
    for (const auto& row : j.at("pairs")) {
      const auto s = corpus.find_submission(row.at("submission").get<std::string>());
      const auto a = corpus.find_reviewer(row.at("first").get<std::string>());
      const auto b = corpus.find_reviewer(row.at("second").get<std::string>());
      if (!s || !a || !b) throw DataError("pair measures refer to ids not in the corpus");
      MeasureValues v;
      v.fill(std::numeric_limits<double>::quiet_NaN());
      for (auto m : kAllMeasures) {
        if (t.measures[index_of(m)]) v[index_of(m)] = row.at("values").at(std::string(to_string(m))).get<double>();
      }
      t.keys.push_back({*s, *a, *b});
      t.values.push_back(v);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("pair measures: ") + e.what());
  }
  return t;
}

std::map<Measure, std::vector<double>> measure_columns(const PairMeasureTable& table) {
  std::map<Measure, std::vector<double>> cols;
  for (auto m : kAllMeasures) {
    if (!table.measures[index_of(m)]) continue;
    auto& c = cols[m];
    for (const auto& v : table.values) c.push_back(v[index_of(m)]);
  }
  return cols;
}

OutcomeTable normalize_outcomes(const PairMeasureTable& table, const CalibrationTable& calibration) {
  std::vector<MeasureValues> values;
  values.reserve(table.values.size());
  for (const auto& v : table.values) {
    MeasureValues out = v;
    for (auto m : kAllMeasures) {
      if (table.measures[index_of(m)] && !is_type_coverage(m)) out[index_of(m)] = normalize_outcome(v[index_of(m)], m, calibration);
    }
    values.push_back(out);
  }
  return OutcomeTable(table.keys, std::move(values));
}

CalibrationTable calibrate_corpus(const ReviewCorpus& reference, const AnnotationSource& source,
                                  std::pair<double, double> percentiles, std::string name, const MeasureSet& want) {
  const auto table = compute_pair_measures(reference, source, want);
  if (table.values.empty()) throw DataError("calibration reference has no reviewed pairs");
  return fit_calibration(measure_columns(table), percentiles, std::move(name));
}

ReviewerTopicOptions topic_options(const PipelineConfig& config) {
  auto t = config.topics;
  t.lda.seed = config.seed;
  if (config.stop_words_path) t.stop_words = read_stop_words(*config.stop_words_path);
  return t;
}

json effects_document(const PipelineConfig& config, const TreatmentTable& treatments,
                      const std::optional<TopicSelection>& topics, const EffectMatrix& matrix,
                      const std::vector<QualityCheck>& quality) {
  json doc;
  doc["schema"] = "slate-lens/effects/v1";
  doc["config"] = to_json(config);
  doc["thresholds"] = {{"h_index", treatments.thresholds.h_index},
                       {"topical_similarity", treatments.thresholds.topical_similarity},
                       {"h_index_from_corpus", treatments.thresholds.h_index_from_corpus},
                       {"topical_from_corpus", treatments.thresholds.topical_from_corpus}};
  if (topics) {
    json coh;
    for (const auto& [k, v] : topics->coherence) coh[std::to_string(k)] = number_or_null(v);
    doc["topics"] = {{"k", topics->k}, {"coherence", coh}};
  } else {
    doc["topics"] = nullptr;
  }
  json cells = json::array();
  for (const auto& c : matrix.cells) {
    json cell = {{"dimension", to_string(c.dimension)},
                 {"outcome", to_string(c.outcome)},
                 {"method", to_string(c.method)},
                 {"gamma", number_or_null(c.gamma)},
                 {"se", number_or_null(c.se)},
                 {"p", number_or_null(c.p)},
                 {"p_adj", number_or_null(c.p_adj)},
                 {"n", c.n},
                 {"significant", c.significant}};
    if (!c.ok()) cell["error"] = c.error;
    cells.push_back(cell);
  }
  doc["cells"] = cells;
  json diags = json::array();
  for (const auto& d : matrix.diagnostics) {
    diags.push_back({{"dimension", to_string(d.dimension)},
                     {"triples", d.triples},
                     {"dropped_missing_expertise", d.dropped_missing_expertise},
                     {"pruned_zero_columns", d.pruned_zero},
                     {"aliased_columns", d.aliased},
                     {"propensity_rows", d.propensity_rows},
                     {"matches", d.matches},
                     {"errors", d.errors}});
  }
  doc["diagnostics"] = diags;
  json q = json::array();
  for (const auto& c : quality) {
    json row = {{"dimension", to_string(c.dimension)}, {"slates", c.slates}};
    if (c.correlation) {
      row["r"] = number_or_null(c.correlation->r);
      row["p"] = number_or_null(c.correlation->p_value);
    } else {
      row["error"] = c.error;
    }
    q.push_back(row);
  }
  doc["quality_check"] = q;
  return doc;
}

std::string render_table(const json& effects) {
  const auto& cells = effects.at("cells");
  if (!cells.is_array() || cells.empty()) throw DataError("effects document has no cells");
  const double significance = effects.at("config").at("causal").at("significance").get<double>();

  static constexpr std::array<const char*, kMeasureCount> kShort = {"Arg", "Asp", "Lex", "Sem",
                                                                     "Lex", "Sem", "W-Arg", "W-Asp"};
  std::ostringstream out;
  char buf[64];
  for (auto method : {Method::parametric, Method::nonparametric}) {
    const auto mname = std::string(to_string(method));
    std::map<std::size_t, std::map<std::size_t, const json*>> grid;  // dimension -> measure -> cell
    for (const auto& c : cells) {
      if (c.at("method").get<std::string>() != mname) continue;
      const auto d = parse_dimension(c.at("dimension").get<std::string>());
      const auto m = parse_measure(c.at("outcome").get<std::string>());
      if (!d || !m) throw DataError("effects document has an unknown dimension or outcome");
      grid[index_of(*d)][index_of(*m)] = &c;
    }
    if (grid.empty()) continue;
    if (out.tellp() > 0) out << '\n';
    std::snprintf(buf, sizeof buf, "%.2g", significance);
    out << mname << " estimates (* adjusted p <= " << buf << ")\n";
    out << std::string(14 + 8, ' ') << "| " << std::left;
    std::snprintf(buf, sizeof buf, "%-40s", "Coverage");
    out << buf << "| Redundancy\n";
    std::snprintf(buf, sizeof buf, "%-14s%7s ", "Dimension", "n");
    out << buf << "|";
    for (std::size_t m = 0; m < kMeasureCount; ++m) {
      if (m == 4) out << " |";
      std::snprintf(buf, sizeof buf, "%8s  ", kShort[m]);
      out << buf;
    }
    out << '\n';
    for (const auto& [d, row] : grid) {
      std::size_t n = 0;
      for (const auto& [m, c] : row) n = std::max(n, c->at("n").get<std::size_t>());
      std::snprintf(buf, sizeof buf, "%-14s%7zu ", std::string(to_string(static_cast<Dimension>(d))).c_str(), n);
      out << buf << "|";
      for (std::size_t m = 0; m < kMeasureCount; ++m) {
        if (m == 4) out << " |";
        const auto it = row.find(m);
        std::string cell = "-";
        char star = ' ';
        if (it != row.end()) {
          const auto& c = *it->second;
          if (c.contains("error") || c.at("gamma").is_null()) {
            cell = "n/a";
          } else {
            std::snprintf(buf, sizeof buf, "%.3f", c.at("gamma").get<double>());
            cell = buf;
            if (c.at("significant").get<bool>()) star = '*';
          }
        }
        std::snprintf(buf, sizeof buf, "%8s%c ", cell.c_str(), star);
        out << buf;
      }
      out << '\n';
    }
  }
  // No trailing blanks.
  std::string text;
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);) {
    line.erase(line.find_last_not_of(' ') + 1);
    text += line + '\n';
  }
  return text;
}

Report run_pipeline(const PipelineConfig& config_in, const RunOptions& options) {
  auto config = config_in;
  config.causal.seed = config.seed;
  config.topics.lda.seed = config.seed;
  validate(config);
  if (config.parallelism > 0) omp_set_num_threads(config.parallelism);
  config.causal.parallel = config.parallelism != 1;

  const auto& dir = config.output_dir;
  fs::create_directories(dir);
  Manifest manifest(dir / "stages.json");
  const bool quiet = options.quiet;
  const auto loaded = stage("load", quiet, [&] {
    return std::make_pair(corpus_fingerprint(config.corpus_dir), load_corpus(CorpusPaths::in_directory(config.corpus_dir)));
  });
  const std::uint64_t corpus_fp = loaded.first;
  const ReviewCorpus& corpus = loaded.second;

  // topics
  const auto topics_fp = fingerprint({hex(corpus_fp), topics_config_json(config), config.seed});
  ReviewerTopics topics;
  topics.vectors.assign(corpus.reviewers.size(), std::nullopt);
  if (config.topics_enabled) {
    topics = stage("topics", quiet, [&] {
      const auto model_path = dir / "topic_model.json";
      const auto vectors_path = dir / "reviewer_topics.json";
      if (options.resume && manifest.matches("topics", topics_fp) && fs::exists(vectors_path)) {
        ReviewerTopics t;
        t.vectors.assign(corpus.reviewers.size(), std::nullopt);
        const auto j = read_json_file(vectors_path);
        if (!j.at("k").is_null()) {
          TopicSelection sel;
          sel.k = j.at("k").get<int>();
          for (const auto& [k, v] : j.at("coherence").items()) {
            sel.coherence[std::stoi(k)] = v.is_null() ? std::nan("") : v.get<double>();
          }
          sel.model = read_topic_model(model_path);
          t.selection = std::move(sel);
        }
        for (const auto& [id, v] : j.at("vectors").items()) {
          const auto r = corpus.find_reviewer(id);
          if (!r) throw DataError("reviewer_topics.json names unknown reviewer " + id);
          const auto vals = v.get<std::vector<double>>();
          t.vectors[*r] = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        }
        t.warnings = j.at("warnings").get<std::vector<std::string>>();
        return t;
      }
      auto t = reviewer_topics(corpus, topic_options(config));
      json j;
      j["k"] = t.selection ? json(t.selection->k) : json(nullptr);
      json coh = json::object();
      if (t.selection) {
        for (const auto& [k, v] : t.selection->coherence) coh[std::to_string(k)] = number_or_null(v);
        write_topic_model(t.selection->model, model_path);
      }
      j["coherence"] = coh;
      json vectors = json::object();
      for (std::size_t r = 0; r < corpus.reviewers.size(); ++r) {
        if (t.vectors[r]) vectors[corpus.reviewers[r].id] = std::vector<double>(t.vectors[r]->begin(), t.vectors[r]->end());
      }
      j["vectors"] = vectors;
      j["warnings"] = t.warnings;
      write_text_file(vectors_path, j.dump() + "\n");
      manifest.record("topics", topics_fp);
      return t;
    });
    if (!quiet) {
      for (const auto& w : topics.warnings) std::clog << "[slate-lens] warning: " << w << '\n';
    }
  }

  // diversity: cheap, always recomputed; the artifact is for inspection.
  const auto treatments = stage("diversity", quiet, [&] {
    auto t = compute_treatments(corpus, topics.vectors, config.thresholds);
    json pairs = json::array();
    for (const auto& p : t.pairs) {
      json delta;
      for (auto d : kAllDimensions) delta[std::string(to_string(d))] = p.delta[index_of(d)];
      pairs.push_back({{"submission", corpus.submissions[p.submission].id},
                       {"first", corpus.reviewers[p.first].id},
                       {"second", corpus.reviewers[p.second].id},
                       {"delta", delta},
                       {"topical_similarity", p.similarity ? json(*p.similarity) : json(nullptr)},
                       {"coauthor_distance", p.distance ? (*p.distance == kUnreachable ? json("unreachable") : json(*p.distance))
                                                        : json(nullptr)}});
    }
    const json doc = {{"thresholds", {{"h_index", t.thresholds.h_index}, {"topical_similarity", t.thresholds.topical_similarity}}},
                      {"pairs", pairs}};
    write_text_file(dir / "treatments.json", doc.dump() + "\n");
    return t;
  });

  // measures
  const json annotation_json = to_json(config).at("annotations");
  const auto wanted = measure_set(config.causal.outcomes);
  json wanted_json = json::array();
  for (auto m : config.causal.outcomes) wanted_json.push_back(to_string(m));
  std::uint64_t measures_fp = 0;
  std::unique_ptr<AnnotationSource> source;
  auto get_source = [&]() -> const AnnotationSource& {
    if (!source) source = make_annotation_source(config);
    return *source;
  };
  const auto raw = stage("measures", quiet, [&] {
    measures_fp = fingerprint({hex(corpus_fp), annotation_json, wanted_json,
                               config.annotations == AnnotationKind::sidecar
                                   ? json(hex(fnv1a64(read_file(config.annotations_path))))
                                   : json(nullptr)});
    const auto path = dir / "pair_measures.json";
    if (options.resume && manifest.matches("measures", measures_fp) && fs::exists(path)) {
      return pair_measures_from_json(corpus, read_json_file(path));
    }
    auto t = compute_pair_measures(corpus, get_source(), wanted);
    write_text_file(path, pair_measures_to_json(corpus, t).dump() + "\n");
    manifest.record("measures", measures_fp);
    return t;
  });

  // calibrate / normalize
  const json calibration_cfg = to_json(config).at("calibration");
  std::uint64_t reference_fp = corpus_fp;
  if (config.calibration_path) reference_fp = fnv1a64(read_file(*config.calibration_path));
  if (config.calibration_reference_dir) reference_fp = corpus_fingerprint(*config.calibration_reference_dir);
  const auto calibration_fp = fingerprint({hex(measures_fp), calibration_cfg, hex(reference_fp)});
  const auto calibration = stage("calibrate", quiet, [&] {
    const auto path = dir / "calibration.json";
    if (options.resume && manifest.matches("calibrate", calibration_fp) && fs::exists(path)) return read_calibration(path);
    CalibrationTable table;
    if (config.calibration_path) {
      table = read_calibration(*config.calibration_path);
    } else if (config.calibration_reference_dir) {
      const auto reference = load_corpus(CorpusPaths::in_directory(*config.calibration_reference_dir));
      table = calibrate_corpus(reference, get_source(), config.percentiles, config.calibration_reference_dir->string(),
                               wanted);
    } else {
      if (!quiet) std::clog << "[slate-lens] warning: no calibration source; calibrating on the analysis corpus\n";
      table = fit_calibration(measure_columns(raw), config.percentiles, "self:" + config.corpus_dir.string());
    }
    write_calibration(table, path);
    manifest.record("calibrate", calibration_fp);
    return table;
  });
  const auto outcomes = stage("normalize", quiet, [&] { return normalize_outcomes(raw, calibration); });

  // causal
  const auto causal_fp = fingerprint({hex(topics_fp), thresholds_json(config.thresholds), hex(calibration_fp),
                                      to_json(config).at("causal"), config.seed});
  const auto effects_path = dir / "effects.json";
  json effects;
  if (options.resume && manifest.matches("causal", causal_fp) && fs::exists(effects_path)) {
    effects = stage("causal", quiet, [&] { return read_json_file(effects_path); });
  } else {
    manifest.forget("causal");
    effects = stage("causal", quiet, [&] {
      const auto matrix = run_effect_matrix(corpus, treatments, outcomes, config.causal);
      const auto quality = quality_correlation_check(corpus, treatments);
      return effects_document(config, treatments, topics.selection, matrix, quality);
    });
    write_text_file(effects_path, effects.dump(2) + "\n");
    manifest.record("causal", causal_fp);
  }

  Report report;
  report.table = stage("report", quiet, [&] { return render_table(effects); });
  write_text_file(dir / "effects.txt", report.table);
  const auto& cells = effects.at("cells");
  if (std::none_of(cells.begin(), cells.end(), [](const json& c) { return !c.contains("error"); })) {
    throw EstimationError("stage causal: every estimate failed; see " + effects_path.string());
  }
  report.effects = std::move(effects);
  return report;
}

}  // namespace slatelens
