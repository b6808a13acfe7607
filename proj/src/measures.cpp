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

#include "slatelens/measures.hpp"

namespace slatelens {

namespace {
constexpr std::array<std::string_view, kMeasureCount> kMeasureIds = {
    "argument_type_coverage", "aspect_type_coverage", "lexical_coverage",
    "semantic_coverage",      "lexical_redundancy",   "semantic_redundancy",
    "weighted_semantic_redundancy_argument", "weighted_semantic_redundancy_aspect"};
}

std::string_view to_string(Measure m) noexcept { return kMeasureIds[index_of(m)]; }

std::optional<Measure> parse_measure(std::string_view id) noexcept {
  for (std::size_t i = 0; i < kMeasureCount; ++i) {
    if (kMeasureIds[i] == id) return static_cast<Measure>(i);
  }
  return std::nullopt;
}

}  // namespace slatelens
