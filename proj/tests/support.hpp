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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "oracles.hpp"
#include "slatelens/causal.hpp"
#include "slatelens/semantic.hpp"
#include "slatelens/synth.hpp"

namespace testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("slatelens-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline Eigen::MatrixXd to_eigen(const oracle::Mat& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.front().size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
    }
  }
  return out;
}

inline slatelens::AnnotatedDoc to_doc(const oracle::ToyDoc& d, const std::string& id = "d") {
  return {id, to_eigen(d.embeddings), to_eigen(d.aspects), to_eigen(d.arguments)};
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SLATELENS_FIXTURE_DIR) / name;
}

// Outcomes read straight from the generator's latent channels.
inline slatelens::OutcomeTable latent_outcomes(const slatelens::SynthOutput& out) {
  std::vector<slatelens::PairKey> keys;
  std::vector<slatelens::MeasureValues> values;
  for (const auto& l : out.latents) {
    keys.push_back({l.submission, l.first, l.second});
    slatelens::MeasureValues v{};
    for (auto m : slatelens::kAllMeasures) v[index_of(m)] = l.latent[static_cast<std::size_t>(slatelens::channel_of(m))];
    values.push_back(v);
  }
  return {std::move(keys), std::move(values)};
}

inline std::vector<std::optional<Eigen::VectorXd>> no_topics(const slatelens::ReviewCorpus& c) {
  return std::vector<std::optional<Eigen::VectorXd>>(c.reviewers.size());
}

}  // namespace testing
