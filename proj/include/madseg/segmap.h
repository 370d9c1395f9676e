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

#ifndef MADSEG_SEGMAP_H_
#define MADSEG_SEGMAP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace madseg {

using ClassId = std::uint8_t;

inline constexpr ClassId kBackgroundId = 0;
inline constexpr ClassId kDefaultIgnoreId = 255;

// Ordered set of class names indexed by class id. Id 0 is the background,
// ids 1..num_object_classes() are object categories, and ignore_id marks
// void pixels that take no part in any statistic.
class ClassCatalog {
 public:
  // Throws InvalidArgument unless there are at least two classes and the
  // ignore id lies outside the contiguous id range.
  explicit ClassCatalog(std::vector<std::string> names,
                        ClassId ignore_id = kDefaultIgnoreId);

  // Catalog with generic names "background", "class_1", ...
  static ClassCatalog WithClassCount(int num_classes,
                                     ClassId ignore_id = kDefaultIgnoreId);

  // Background plus the twenty PASCAL VOC object categories.
  static ClassCatalog PascalVoc();

  int num_classes() const { return static_cast<int>(names_.size()); }
  int num_object_classes() const { return num_classes() - 1; }
  ClassId ignore_id() const { return ignore_id_; }
  const std::string& name(int class_id) const;
  const std::vector<std::string>& names() const { return names_; }

  bool IsClass(int value) const { return value >= 0 && value < num_classes(); }
  bool IsIgnore(int value) const { return value == ignore_id_; }

 private:
  std::vector<std::string> names_;
  ClassId ignore_id_;
};

// Dense per-pixel label grid, row-major.
class LabelMap {
 public:
  // Throws InvalidArgument when a dimension is zero or the pixel buffer does
  // not hold width * height values.
  LabelMap(int width, int height, std::vector<ClassId> pixels);
  // Map filled with a single value.
  LabelMap(int width, int height, ClassId fill);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }

  ClassId at(int x, int y) const { return pixels_[Index(x, y)]; }
  void set(int x, int y, ClassId value) { pixels_[Index(x, y)] = value; }

  std::span<const ClassId> pixels() const { return pixels_; }
  std::span<ClassId> mutable_pixels() { return pixels_; }

  bool SameShape(const LabelMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Throws InvalidArgument naming the first pixel that is neither a catalog
  // class nor the ignore id.
  void Validate(const ClassCatalog& catalog) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<ClassId> pixels_;
};

// counts(r, c) = number of pixels labeled r in the first map and c in the
// second. Pixels that are ignored in either map are not counted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const { return num_classes_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(int row, int col) const {
    return counts_[static_cast<std::size_t>(row) * num_classes_ + col];
  }
  void Add(int row, int col, std::uint64_t n = 1);

  std::uint64_t row_sum(int row) const;
  std::uint64_t col_sum(int col) const;

  ConfusionMatrix Transposed() const;

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  int num_classes_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

enum class MetricKind { kMiou, kFwiou, kMpa };

std::string_view MetricName(MetricKind kind);  // "miou", "fwiou", "mpa"
MetricKind ParseMetric(std::string_view name);  // throws InvalidArgument

// Throws InvalidArgument on dimension mismatch or on a pixel value that is
// neither a catalog class nor the ignore id.
ConfusionMatrix Confusion(const LabelMap& a, const LabelMap& b,
                          const ClassCatalog& catalog);

// The three scores below throw InvalidArgument when cm.total() == 0.

// Mean IoU over classes with a nonempty union.
double MeanIou(const ConfusionMatrix& cm);
// Sum over classes of (row frequency) * IoU.
double FrequencyWeightedIou(const ConfusionMatrix& cm);
// Mean over classes with a nonzero row sum of diag / row_sum. Not symmetric.
double MeanPixelAccuracy(const ConfusionMatrix& cm);

double Score(const ConfusionMatrix& cm, MetricKind metric);

// Agreement between two maps under the given metric.
double Concordance(const LabelMap& a, const LabelMap& b, MetricKind metric,
                   const ClassCatalog& catalog);

// Per-class pixel counts over non-ignored pixels, indexed by class id.
std::vector<std::uint64_t> ClassCounts(const LabelMap& map,
                                       const ClassCatalog& catalog);

// Fraction of non-ignored pixels per class id. Throws InvalidArgument when
// every pixel is ignored.
std::vector<double> ClassProportions(const LabelMap& map,
                                     const ClassCatalog& catalog);

}  // namespace madseg

#endif  // MADSEG_SEGMAP_H_
