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

#include <omp.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slatelens/error.hpp"
#include "slatelens/pipeline.hpp"
#include "slatelens/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slatelens;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> dimensions;
  std::vector<std::string> outcomes;
  std::string method;
  std::optional<std::int64_t> permutations;
  std::optional<double> fdr;
  std::optional<int> parallelism;
  bool resume = false;
  bool quiet = false;
};

int cmd_run(const RunFlags& f) {
  auto j = read_json(f.config);
  auto& causal = j["causal"];
  if (f.seed) j["seed"] = *f.seed;
  if (!f.dimensions.empty()) causal["dimensions"] = f.dimensions;
  if (!f.outcomes.empty()) causal["outcomes"] = f.outcomes;
  if (!f.method.empty()) causal["method"] = f.method;
  if (f.permutations) causal["permutations"] = *f.permutations;
  if (f.fdr) causal["fdr"] = *f.fdr;
  if (f.parallelism) j["parallelism"] = *f.parallelism;
  const auto config = pipeline_config_from_json(j, fs::path(f.config).parent_path());
  const auto report = run_pipeline(config, {f.resume, f.quiet});
  std::cout << report.table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slate-lens: coverage and redundancy of reviewer slates, and the effect of slate diversity"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted effects");
  std::string synth_config;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  bool synth_annotations = false;
  synth->add_option("--config", synth_config, "synth config (JSON)");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "override the config seed");
  synth->add_flag("--annotations", synth_annotations, "also write fallback annotations.jsonl");

  auto* annotate = app.add_subcommand("annotate-fallback", "write sentences.jsonl and fallback annotations.jsonl");
  std::string ann_corpus;
  std::string ann_out;
  std::uint64_t ann_seed = 0x5eed;
  std::size_t ann_dim = kEmbeddingDim;
  annotate->add_option("--corpus", ann_corpus, "corpus directory")->required();
  annotate->add_option("--out", ann_out, "output directory")->required();
  annotate->add_option("--seed", ann_seed, "projection seed");
  annotate->add_option("--dim", ann_dim, "embedding dimension");

  auto* calibrate = app.add_subcommand("calibrate", "fit outcome calibration bounds on a reference corpus");
  std::string cal_corpus;
  std::string cal_out;
  std::string cal_annotations;
  std::vector<double> cal_percentiles{1.0, 99.0};
  calibrate->add_option("--corpus", cal_corpus, "reference corpus directory")->required();
  calibrate->add_option("--out", cal_out, "calibration file to write")->required();
  calibrate->add_option("--annotations", cal_annotations, "sidecar annotations (fallback when omitted)");
  calibrate->add_option("--percentiles", cal_percentiles, "lower and upper percentile")->expected(2);

  auto* run = app.add_subcommand("run", "run the full pipeline");
  RunFlags rf;
  run->add_option("--config", rf.config, "pipeline config (JSON)")->required();
  run->add_option("--seed", rf.seed, "seed override");
  run->add_option("--dimension", rf.dimensions, "restrict to these dimensions");
  run->add_option("--outcome", rf.outcomes, "restrict to these outcomes");
  run->add_option("--method", rf.method, "parametric, nonparametric or both")
      ->check(CLI::IsMember({"parametric", "nonparametric", "both"}));
  run->add_option("--permutations", rf.permutations, "permutation count");
  run->add_option("--fdr", rf.fdr, "Benjamini-Hochberg false discovery rate");
  run->add_option("--parallelism", rf.parallelism, "worker threads (0 = all)");
  run->add_flag("--resume", rf.resume, "reuse stage artifacts that match the config");
  run->add_flag("--quiet", rf.quiet, "no progress output");

  auto* report = app.add_subcommand("report", "render an effects.json file as a table");
  std::string rep_effects;
  std::string rep_out;
  report->add_option("--effects", rep_effects, "effects.json")->required();
  report->add_option("--out", rep_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      SynthConfig c;
      if (!synth_config.empty()) c = synth_config_from_json(read_json(synth_config));
      if (synth_seed) c.seed = *synth_seed;
      const auto out = generate_corpus(c);
      write_synth(out, synth_out);
      if (synth_annotations) {
        const auto bundle = annotate_corpus(out.corpus, FallbackSource{});
        write_annotations(bundle, fs::path(synth_out) / "annotations.jsonl");
      }
      std::cout << "wrote " << out.corpus.submissions.size() << " submissions to " << synth_out << '\n';
    } else if (*annotate) {
      const auto corpus = load_corpus(CorpusPaths::in_directory(ann_corpus));
      fs::create_directories(ann_out);
      write_sentences(sentence_records(corpus), fs::path(ann_out) / "sentences.jsonl");
      const auto bundle = annotate_corpus(corpus, FallbackSource(FallbackAnnotator(ann_seed, ann_dim)));
      write_annotations(bundle, fs::path(ann_out) / "annotations.jsonl");
      std::cout << "annotated " << bundle.docs.size() << " documents\n";
    } else if (*calibrate) {
      if (cal_percentiles.size() != 2) throw ConfigError("--percentiles takes two values");
      const auto reference = load_corpus(CorpusPaths::in_directory(cal_corpus));
      std::unique_ptr<AnnotationSource> source;
      if (cal_annotations.empty()) {
        source = std::make_unique<FallbackSource>();
      } else {
        source = std::make_unique<BundleSource>(std::make_shared<const AnnotationBundle>(read_annotations(cal_annotations)));
      }
      const auto table = calibrate_corpus(reference, *source, {cal_percentiles[0], cal_percentiles[1]}, cal_corpus);
      write_calibration(table, cal_out);
      std::cout << "wrote " << cal_out << '\n';
    } else if (*run) {
      return cmd_run(rf);
    } else if (*report) {
      std::ifstream in(rep_effects);
      if (!in) throw DataError("cannot open " + rep_effects);
      json effects;
      try {
        in >> effects;
      } catch (const json::exception& e) {
        throw DataError(rep_effects + ": " + e.what());
      }
      const auto table = render_table(effects);
      if (rep_out.empty()) {
        std::cout << table;
      } else {
        write_text_file(rep_out, table);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
