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

#include "slatelens/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "slatelens/error.hpp"

namespace slatelens {
using nlohmann::json;

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in [0, 100]");
  const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  const auto lo_rank = static_cast<std::size_t>(std::floor(h));
  const auto hi_rank = std::min(lo_rank + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo_rank), values.end());
  const double lo = values[lo_rank];
  if (hi_rank == lo_rank) return lo;
  const double hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo_rank) + 1, values.end());
  return lo + (h - static_cast<double>(lo_rank)) * (hi - lo);
}

CalibrationTable fit_calibration(const std::map<Measure, std::vector<double>>& raw_values,
                                 std::pair<double, double> percentiles, std::string reference) {
  if (!(percentiles.first < percentiles.second)) throw ConfigError("calibration percentiles must be increasing");
  CalibrationTable table{std::move(reference), percentiles, {}};
  for (const auto& [measure, values] : raw_values) {
    if (is_type_coverage(measure)) continue;
    const Bounds b{percentile(values, percentiles.first), percentile(values, percentiles.second)};
    if (!(b.lo < b.hi)) {
      throw DataError("calibration: degenerate range for measure " + std::string(to_string(measure)));
    }
    table.bounds.emplace(measure, b);
  }
  return table;
}

double normalize_outcome(double raw, Measure measure, const CalibrationTable& table) {
  const auto it = table.bounds.find(measure);
  if (it == table.bounds.end()) {
    throw ConfigError("calibration table has no bounds for measure " + std::string(to_string(measure)));
  }
  const auto [lo, hi] = it->second;
  return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

MeasureValues normalize_all(const MeasureValues& raw, const CalibrationTable& table) {
  MeasureValues out{};
  for (const auto m : kAllMeasures) {
    out[index_of(m)] = is_type_coverage(m) ? raw[index_of(m)] : normalize_outcome(raw[index_of(m)], m, table);
  }
  return out;
}

void write_calibration(const CalibrationTable& table, const std::filesystem::path& path) {
  json bounds = json::object();
  for (const auto& [m, b] : table.bounds) bounds[std::string(to_string(m))] = {{"lo", b.lo}, {"hi", b.hi}};
  const json j = {{"schema", kCalibrationSchema},
                  {"reference", table.reference},
                  {"percentiles", {table.percentiles.first, table.percentiles.second}},
                  {"bounds", bounds}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CalibrationTable read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path.string());
  try {
    json j;
    in >> j;
    if (j.at("schema").get<std::string>() != kCalibrationSchema) {
      throw ConfigError(path.string() + ": unsupported calibration schema");
    }
    CalibrationTable t;
    t.reference = j.at("reference").get<std::string>();
    const auto p = j.at("percentiles").get<std::vector<double>>();
    if (p.size() != 2) throw ConfigError(path.string() + ": percentiles must have two entries");
    t.percentiles = {p[0], p[1]};
    for (const auto& [id, b] : j.at("bounds").items()) {
      const auto m = parse_measure(id);
      if (!m) throw ConfigError(path.string() + ": unknown measure id " + id);
      Bounds bounds{b.at("lo").get<double>(), b.at("hi").get<double>()};
      if (!(bounds.lo < bounds.hi)) throw ConfigError(path.string() + ": lo must be below hi for " + id);
      t.bounds.emplace(*m, bounds);
    }
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace slatelens
