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

#include "madseg/segmap.h"

#include <string>
#include <utility>

#include "madseg/error.h"

namespace madseg {

ClassCatalog::ClassCatalog(std::vector<std::string> names, ClassId ignore_id)
    : names_(std::move(names)), ignore_id_(ignore_id) {
  if (names_.size() < 2) {
    throw InvalidArgument("class catalog needs background plus at least one "
                          "object class");
  }
  if (static_cast<int>(ignore_id_) < num_classes()) {
    throw InvalidArgument("ignore id " + std::to_string(ignore_id_) +
                          " collides with a class id (catalog has " +
                          std::to_string(num_classes()) + " classes)");
  }
}

ClassCatalog ClassCatalog::WithClassCount(int num_classes, ClassId ignore_id) {
  if (num_classes < 2 || num_classes > 255) {
    throw InvalidArgument("class count must be in [2, 255], got " +
                          std::to_string(num_classes));
  }
  std::vector<std::string> names;
  names.reserve(num_classes);
  names.emplace_back("background");
  for (int y = 1; y < num_classes; ++y) names.push_back("class_" + std::to_string(y));
  return ClassCatalog(std::move(names), ignore_id);
}

ClassCatalog ClassCatalog::PascalVoc() {
  return ClassCatalog({"background", "aeroplane", "bicycle", "bird", "boat",
                       "bottle", "bus", "car", "cat", "chair", "cow",
                       "diningtable", "dog", "horse", "motorbike", "person",
                       "pottedplant", "sheep", "sofa", "train", "tvmonitor"});
}

const std::string& ClassCatalog::name(int class_id) const {
  if (!IsClass(class_id)) {
    throw InvalidArgument("unknown class id " + std::to_string(class_id));
  }
  return names_[class_id];
}

LabelMap::LabelMap(int width, int height, std::vector<ClassId> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ <= 0 || height_ <= 0) {
    throw InvalidArgument("label map has a zero dimension (" +
                          std::to_string(width_) + "x" +
                          std::to_string(height_) + ")");
  }
  if (pixels_.size() != static_cast<std::size_t>(width_) * height_) {
    throw InvalidArgument("label map buffer holds " +
                          std::to_string(pixels_.size()) + " values for a " +
                          std::to_string(width_) + "x" +
                          std::to_string(height_) + " grid");
  }
}

LabelMap::LabelMap(int width, int height, ClassId fill)
    : LabelMap(width, height,
               std::vector<ClassId>(
                   width > 0 && height > 0
                       ? static_cast<std::size_t>(width) * height
                       : 0,
                   fill)) {}

void LabelMap::Validate(const ClassCatalog& catalog) const {
  for (std::size_t n = 0; n < pixels_.size(); ++n) {
    const int v = pixels_[n];
    if (!catalog.IsClass(v) && !catalog.IsIgnore(v)) {
      throw InvalidArgument(
          "pixel value " + std::to_string(v) + " at (x=" +
          std::to_string(n % width_) + ", y=" + std::to_string(n / width_) +
          ") is neither a class id in [0, " +
          std::to_string(catalog.num_classes() - 1) + "] nor the ignore id " +
          std::to_string(catalog.ignore_id()));
    }
  }
}

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes <= 0) throw InvalidArgument("confusion matrix needs classes");
}

void ConfusionMatrix::Add(int row, int col, std::uint64_t n) {
  counts_[static_cast<std::size_t>(row) * num_classes_ + col] += n;
  total_ += n;
}

std::uint64_t ConfusionMatrix::row_sum(int row) const {
  std::uint64_t s = 0;
  for (int c = 0; c < num_classes_; ++c) s += count(row, c);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(int col) const {
  std::uint64_t s = 0;
  for (int r = 0; r < num_classes_; ++r) s += count(r, col);
  return s;
}

ConfusionMatrix ConfusionMatrix::Transposed() const {
  ConfusionMatrix t(num_classes_);
  for (int r = 0; r < num_classes_; ++r) {
    for (int c = 0; c < num_classes_; ++c) {
      if (count(r, c) != 0) t.Add(c, r, count(r, c));
    }
  }
  return t;
}

std::string_view MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMiou:
      return "miou";
    case MetricKind::kFwiou:
      return "fwiou";
    case MetricKind::kMpa:
      return "mpa";
  }
  return "unknown";
}

MetricKind ParseMetric(std::string_view name) {
  if (name == "miou") return MetricKind::kMiou;
  if (name == "fwiou") return MetricKind::kFwiou;
  if (name == "mpa") return MetricKind::kMpa;
  throw InvalidArgument("unknown metric '" + std::string(name) +
                        "' (expected miou, fwiou or mpa)");
}

ConfusionMatrix Confusion(const LabelMap& a, const LabelMap& b,
                          const ClassCatalog& catalog) {
  if (!a.SameShape(b)) {
    throw InvalidArgument(
        "label map dimensions differ: " + std::to_string(a.width()) + "x" +
        std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
        std::to_string(b.height()));
  }
  const int k = catalog.num_classes();
  const ClassId ignore = catalog.ignore_id();
  // Tally into a flat buffer first; the class count is at most 255.
  std::vector<std::uint64_t> tally(static_cast<std::size_t>(k) * k, 0);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t n = 0; n < pa.size(); ++n) {
    const ClassId va = pa[n];
    const ClassId vb = pb[n];
    if (va == ignore || vb == ignore) continue;
    if (va >= k || vb >= k) {
      throw InvalidArgument("pixel value " + std::to_string(va >= k ? va : vb) +
                            " outside the class catalog at index " +
                            std::to_string(n));
    }
    ++tally[static_cast<std::size_t>(va) * k + vb];
  }
  ConfusionMatrix cm(k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      const auto n = tally[static_cast<std::size_t>(r) * k + c];
      if (n != 0) cm.Add(r, c, n);
    }
  }
  return cm;
}

namespace {

void RequireCounts(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw InvalidArgument("no comparable pixels: every pixel is ignored");
  }
}

}  // namespace

double MeanIou(const ConfusionMatrix& cm) {
  RequireCounts(cm);
  double sum = 0.0;
  int included = 0;
  for (int y = 0; y < cm.num_classes(); ++y) {
    const std::uint64_t diag = cm.count(y, y);
    const std::uint64_t uni = cm.row_sum(y) + cm.col_sum(y) - diag;
    if (uni == 0) continue;
    sum += static_cast<double>(diag) / static_cast<double>(uni);
    ++included;
  }
  return sum / included;
}

double FrequencyWeightedIou(const ConfusionMatrix& cm) {
  RequireCounts(cm);
  const double total = static_cast<double>(cm.total());
  double sum = 0.0;
  for (int y = 0; y < cm.num_classes(); ++y) {
    const std::uint64_t diag = cm.count(y, y);
    const std::uint64_t row = cm.row_sum(y);
    const std::uint64_t uni = row + cm.col_sum(y) - diag;
    if (uni == 0) continue;
    sum += static_cast<double>(row) *
           (static_cast<double>(diag) / static_cast<double>(uni));
  }
  return sum / total;
}

double MeanPixelAccuracy(const ConfusionMatrix& cm) {
  RequireCounts(cm);
  double sum = 0.0;
  int included = 0;
  for (int y = 0; y < cm.num_classes(); ++y) {
    const std::uint64_t row = cm.row_sum(y);
    if (row == 0) continue;
    sum += static_cast<double>(cm.count(y, y)) / static_cast<double>(row);
    ++included;
  }
  return sum / included;
}

double Score(const ConfusionMatrix& cm, MetricKind metric) {
  switch (metric) {
    case MetricKind::kMiou:
      return MeanIou(cm);
    case MetricKind::kFwiou:
      return FrequencyWeightedIou(cm);
    case MetricKind::kMpa:
      return MeanPixelAccuracy(cm);
  }
  throw InvalidArgument("unknown metric");
}

double Concordance(const LabelMap& a, const LabelMap& b, MetricKind metric,
                   const ClassCatalog& catalog) {
  return Score(Confusion(a, b, catalog), metric);
}

std::vector<std::uint64_t> ClassCounts(const LabelMap& map,
                                       const ClassCatalog& catalog) {
  std::vector<std::uint64_t> counts(catalog.num_classes(), 0);
  const ClassId ignore = catalog.ignore_id();
  for (ClassId v : map.pixels()) {
    if (v == ignore) continue;
    if (v >= counts.size()) {
      throw InvalidArgument("pixel value " + std::to_string(v) +
                            " outside the class catalog");
    }
    ++counts[v];
  }
  return counts;
}

std::vector<double> ClassProportions(const LabelMap& map,
                                     const ClassCatalog& catalog) {
  const auto counts = ClassCounts(map, catalog);
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) {
    throw InvalidArgument("class proportions undefined: every pixel is ignored");
  }
  std::vector<double> fractions(counts.size());
  for (std::size_t y = 0; y < counts.size(); ++y) {
    fractions[y] = static_cast<double>(counts[y]) / static_cast<double>(total);
  }
  return fractions;
}

}  // namespace madseg
