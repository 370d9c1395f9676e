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

#ifndef MADSEG_SELECTION_H_
#define MADSEG_SELECTION_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madseg/segmap.h"

namespace madseg {

struct ImageRef {
  std::string image_id;
  std::string path;  // relative to the corpus root

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

// The unlabeled image pool. Images are kept sorted by id; ids are unique.
class Corpus {
 public:
  Corpus() = default;
  // Throws InvalidArgument on duplicate or empty ids.
  explicit Corpus(std::vector<ImageRef> images);

  // One image per id with path "<id>.png".
  static Corpus FromIds(std::vector<std::string> ids);

  const std::vector<ImageRef>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }
  const ImageRef* Find(std::string_view image_id) const;

 private:
  std::vector<ImageRef> images_;
};

// One model's predictions over the corpus, either held in memory or read on
// demand from "<dir>/<image_id>.png".
class PredictionStore {
 public:
  static PredictionStore InMemory(std::string model_id,
                                  std::map<std::string, LabelMap> maps);
  static PredictionStore FromDirectory(std::string model_id,
                                       std::filesystem::path dir,
                                       ClassCatalog catalog);

  const std::string& model_id() const { return model_id_; }
  bool Contains(const std::string& image_id) const;

  // Throws NotFound naming the model and the image when the prediction is
  // missing.
  std::shared_ptr<const LabelMap> Load(const std::string& image_id) const;

  // Location of the prediction file; empty for in-memory stores.
  std::filesystem::path PathFor(const std::string& image_id) const;

 private:
  PredictionStore() = default;

  std::string model_id_;
  std::shared_ptr<const std::map<std::string, std::shared_ptr<const LabelMap>>>
      maps_;
  std::filesystem::path dir_;
  std::optional<ClassCatalog> catalog_;
};

struct ScaleBounds {
  double t_min = 0.0;
  double t_max = 1.0;

  friend bool operator==(const ScaleBounds&, const ScaleBounds&) = default;
};

// Per-category first/third quartile of the object pixel proportion. A
// category without an entry is not scale constrained.
class ScaleStats {
 public:
  explicit ScaleStats(int num_classes);

  int num_classes() const { return static_cast<int>(bounds_.size()); }
  void Set(int category, ScaleBounds bounds);
  std::optional<ScaleBounds> Get(int category) const;

  // True when the proportion lies inside the closed interval, or when the
  // category has no entry.
  bool Admits(int category, double proportion) const;

  // "category,t_min,t_max" rows for every present entry, preceded by
  // `comment_lines` prefixed with '#'.
  std::string ToCsv(std::span<const std::string> comment_lines = {}) const;
  // Skips '#' lines. Throws InvalidArgument on malformed rows.
  static ScaleStats FromCsv(std::string_view text, int num_classes);

  friend bool operator==(const ScaleStats&, const ScaleStats&) = default;

 private:
  std::vector<std::optional<ScaleBounds>> bounds_;
};

// Quartiles of each category's proportion over the labeled maps in which the
// category occurs.
ScaleStats ComputeScaleStats(std::span<const LabelMap> labeled,
                             const ClassCatalog& catalog);

enum class ScaleSource { kDefender, kAttacker, kBoth };

std::string_view ScaleSourceName(ScaleSource source);
ScaleSource ParseScaleSource(std::string_view name);

struct SelectionOptions {
  MetricKind metric = MetricKind::kMiou;
  int k = 1;
  ScaleSource scale_source = ScaleSource::kDefender;
  int jobs = 1;
};

struct SelectionRecord {
  std::string image_id;
  std::string defender;
  std::string attacker;
  int category = 0;
  double concordance = 0.0;
  MetricKind metric = MetricKind::kMiou;
  int rank_in_group = 1;

  friend bool operator==(const SelectionRecord&,
                         const SelectionRecord&) = default;
};

// The selected competition images with full provenance. Records keep their
// insertion order; `images()` is the deduplicated, id-sorted image set.
class MadSet {
 public:
  MadSet() = default;
  explicit MadSet(std::vector<SelectionRecord> records);

  void Add(SelectionRecord record);
  void Append(const MadSet& other);

  const std::vector<SelectionRecord>& records() const { return records_; }
  const std::set<std::string>& images() const { return images_; }
  bool empty() const { return records_.empty(); }

  // Records whose defender and attacker match.
  std::vector<SelectionRecord> Subset(std::string_view defender,
                                      std::string_view attacker) const;

  // One JSON object per line, in record order.
  std::string ToJsonLines(std::string_view header_line = {}) const;
  // Lines that do not describe a record (blank, or objects carrying a
  // "provenance" key) are skipped.
  static MadSet FromJsonLines(std::string_view text);

  friend bool operator==(const MadSet& a, const MadSet& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<SelectionRecord> records_;
  std::set<std::string> images_;
};

struct ScoredImage {
  std::string image_id;
  double concordance = 0.0;
};

struct ModelPair {
  int defender = 0;
  int attacker = 0;
};

// Category groups D^(y) induced by the defender: image ids (corpus order) whose
// prediction contains category y at least once. Indexed by class id; the
// background entry stays empty.
std::vector<std::vector<std::string>> GroupByDefender(
    const PredictionStore& defender, const Corpus& corpus,
    const ClassCatalog& catalog);

// Keeps the images whose proportion of `category` in `source` lies inside the
// category's quartile bounds.
std::vector<std::string> ScaleFilter(std::span<const std::string> group,
                                     const PredictionStore& source,
                                     int category, const ScaleStats& stats,
                                     const ClassCatalog& catalog);

// The k candidates with the smallest concordance, ascending, ties broken by
// ascending image id. Throws InvalidArgument when k < 1.
std::vector<SelectionRecord> SelectTopK(std::span<const ScoredImage> candidates,
                                        std::string_view defender,
                                        std::string_view attacker, int category,
                                        MetricKind metric, int k);

// MAD selection restricted to the listed ordered pairs (indices into
// `stores`). Records are ordered by pair (as listed), then category, then rank.
MadSet SelectPairs(std::span<const PredictionStore> stores,
                   const Corpus& corpus, const ScaleStats& stats,
                   const ClassCatalog& catalog,
                   const SelectionOptions& options,
                   std::span<const ModelPair> pairs);

// Every ordered pair (i, j), i != j, in row-major order.
std::vector<ModelPair> AllOrderedPairs(int num_models);

MadSet RunPairwiseSelection(std::span<const PredictionStore> stores,
                            const Corpus& corpus, const ScaleStats& stats,
                            const ClassCatalog& catalog,
                            const SelectionOptions& options);

// Unique image ids in ascending order. Throws InvalidArgument when empty.
std::vector<std::string> AssembleAnnotationBatch(const MadSet& mad);

}  // namespace madseg

#endif  // MADSEG_SELECTION_H_
