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
#include <cstddef>
#include <optional>
#include <string_view>

namespace slatelens {

/// Outcome measures in report column order: coverage (type, then paper),
/// then redundancy.
enum class Measure : std::size_t {
  argument_coverage,
  aspect_coverage,
  lexical_coverage,
  semantic_coverage,
  lexical_redundancy,
  semantic_redundancy,
  weighted_redundancy_argument,
  weighted_redundancy_aspect,
};

inline constexpr std::size_t kMeasureCount = 8;

inline constexpr std::array<Measure, kMeasureCount> kAllMeasures = {
    Measure::argument_coverage,  Measure::aspect_coverage,     Measure::lexical_coverage,
    Measure::semantic_coverage,  Measure::lexical_redundancy,  Measure::semantic_redundancy,
    Measure::weighted_redundancy_argument, Measure::weighted_redundancy_aspect};

using MeasureValues = std::array<double, kMeasureCount>;

constexpr std::size_t index_of(Measure m) noexcept { return static_cast<std::size_t>(m); }

std::string_view to_string(Measure m) noexcept;
std::optional<Measure> parse_measure(std::string_view id) noexcept;

/// Type coverage is already a fraction and is not range-calibrated.
constexpr bool is_type_coverage(Measure m) noexcept {
  return m == Measure::argument_coverage || m == Measure::aspect_coverage;
}

constexpr bool is_redundancy(Measure m) noexcept { return index_of(m) >= index_of(Measure::lexical_redundancy); }

constexpr bool is_lexical(Measure m) noexcept {
  return m == Measure::lexical_coverage || m == Measure::lexical_redundancy;
}

/// Which measures to compute.
using MeasureSet = std::array<bool, kMeasureCount>;

inline constexpr MeasureSet kEveryMeasure = {true, true, true, true, true, true, true, true};

template <typename Range>
MeasureSet measure_set(const Range& measures) {
  MeasureSet s{};
  for (Measure m : measures) s[index_of(m)] = true;
  return s;
}

}  // namespace slatelens
