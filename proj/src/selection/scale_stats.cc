// Copyright 2026 The madseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <string>

#include "madseg/error.h"
#include "madseg/selection.h"
#include "madseg/statistics.h"
#include "madseg/text.h"

namespace madseg {

ScaleStats::ScaleStats(int num_classes) : bounds_(num_classes) {
  if (num_classes < 2) throw InvalidArgument("scale stats need at least two classes");
}

void ScaleStats::Set(int category, ScaleBounds bounds) {
  if (category <= 0 || category >= num_classes()) {
    throw InvalidArgument("scale stats category " + std::to_string(category) +
                          " is not an object class");
  }
  if (!(0.0 <= bounds.t_min && bounds.t_min <= bounds.t_max && bounds.t_max <= 1.0)) {
    throw InvalidArgument("scale bounds for category " + std::to_string(category) +
                          " violate 0 <= t_min <= t_max <= 1");
  }
  bounds_[category] = bounds;
}

std::optional<ScaleBounds> ScaleStats::Get(int category) const {
  if (category < 0 || category >= num_classes()) return std::nullopt;
  return bounds_[category];
}

bool ScaleStats::Admits(int category, double proportion) const {
  const auto bounds = Get(category);
  if (!bounds) return true;
  return proportion >= bounds->t_min && proportion <= bounds->t_max;
}

std::string ScaleStats::ToCsv(std::span<const std::string> comment_lines) const {
  std::string out;
  for (const auto& line : comment_lines) out += "# " + line + "\n";
  out += "category,t_min,t_max\n";
  for (int y = 1; y < num_classes(); ++y) {
    if (!bounds_[y]) continue;
    out += std::to_string(y) + "," + FormatDouble(bounds_[y]->t_min) + "," +
           FormatDouble(bounds_[y]->t_max) + "\n";
  }
  return out;
}

ScaleStats ScaleStats::FromCsv(std::string_view text, int num_classes) {
  ScaleStats stats(num_classes);
  bool header_seen = false;
  int line_no = 0;
  for (const auto& raw : Split(text, '\n')) {
    ++line_no;
    const auto line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "category,t_min,t_max") {
        throw InvalidArgument("scale stats: expected header 'category,t_min,t_max'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = Split(line, ',');
    if (fields.size() != 3) {
      throw InvalidArgument("scale stats line " + std::to_string(line_no) +
                            ": expected 3 fields");
    }
    stats.Set(static_cast<int>(ParseInt(fields[0])),
              ScaleBounds{ParseDouble(fields[1]), ParseDouble(fields[2])});
  }
  if (!header_seen) throw InvalidArgument("scale stats: missing header");
  return stats;
}

ScaleStats ComputeScaleStats(std::span<const LabelMap> labeled,
                             const ClassCatalog& catalog) {
  if (labeled.empty()) throw InvalidArgument("labeled set is empty");
  const int k = catalog.num_classes();
  std::vector<std::vector<double>> samples(k);
  for (const auto& gt : labeled) {
    const auto counts = ClassCounts(gt, catalog);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) continue;
    for (int y = 1; y < k; ++y) {
      if (counts[y] == 0) continue;
      samples[y].push_back(static_cast<double>(counts[y]) / static_cast<double>(total));
    }
  }
  ScaleStats stats(k);
  for (int y = 1; y < k; ++y) {
    if (samples[y].empty()) continue;
    std::sort(samples[y].begin(), samples[y].end());
    stats.Set(y, ScaleBounds{SortedQuantile(samples[y], 0.25),
                             SortedQuantile(samples[y], 0.75)});
  }
  return stats;
}

std::string_view ScaleSourceName(ScaleSource source) {
  switch (source) {
    case ScaleSource::kDefender:
      return "defender";
    case ScaleSource::kAttacker:
      return "attacker";
    case ScaleSource::kBoth:
      return "both";
  }
  return "unknown";
}

ScaleSource ParseScaleSource(std::string_view name) {
  if (name == "defender") return ScaleSource::kDefender;
  if (name == "attacker") return ScaleSource::kAttacker;
  if (name == "both") return ScaleSource::kBoth;
  throw InvalidArgument("unknown scale source '" + std::string(name) +
                        "' (expected defender, attacker or both)");
}

}  // namespace madseg
