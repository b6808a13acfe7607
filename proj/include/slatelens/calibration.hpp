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

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slatelens/measures.hpp"

namespace slatelens {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Raw-scale bounds per range-calibrated measure, fitted on a reference corpus.
struct CalibrationTable {
  std::string reference;
  std::pair<double, double> percentiles{1.0, 99.0};
  std::map<Measure, Bounds> bounds;

  bool contains(Measure m) const noexcept { return bounds.count(m) != 0; }
};

inline constexpr const char* kCalibrationSchema = "slate-lens/calibration/v1";

/// Linear-interpolation percentile (p in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double p);

/// Fits lo/hi as the given percentiles of each measure's raw values. Type
/// coverage entries are ignored. Throws DataError naming any measure whose
/// range is degenerate (lo == hi).
CalibrationTable fit_calibration(const std::map<Measure, std::vector<double>>& raw_values,
                                 std::pair<double, double> percentiles, std::string reference);

/// clip((raw - lo) / (hi - lo), 0, 1). Throws ConfigError for a measure the
/// table does not contain.
double normalize_outcome(double raw, Measure measure, const CalibrationTable& table);

/// Normalizes every measure; type coverage passes through unchanged.
MeasureValues normalize_all(const MeasureValues& raw, const CalibrationTable& table);

void write_calibration(const CalibrationTable& table, const std::filesystem::path& path);
CalibrationTable read_calibration(const std::filesystem::path& path);

}  // namespace slatelens
