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

#ifndef MADSEG_SYNTH_H_
#define MADSEG_SYNTH_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madseg/ranking.h"
#include "madseg/segmap.h"
#include "madseg/selection.h"

namespace madseg::synth {

// Deterministic 64-bit generator (xoshiro256**, seeded through SplitMix64).
// Every random draw in the synthetic pipeline comes from one of these, keyed
// by an explicit seed and a stream label, so results never depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent substream for (seed, label, index).
  static Rng Stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t Next();
  // Uniform integer in [0, bound), bound > 0. Unbiased (Lemire).
  std::uint64_t Below(std::uint64_t bound);
  // Uniform integer in [lo, hi].
  int Between(int lo, int hi);
  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

 private:
  std::uint64_t s_[4];
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_images = 100;
  int width = 64;
  int height = 64;
  int num_classes = 6;  // background included
  int min_blobs = 1;
  int max_blobs = 4;
  std::vector<double> noise_rates;

  // Throws InvalidArgument on unsatisfiable settings.
  void Validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  std::map<std::string, LabelMap> ground_truth;  // by image id
};

// Background plus rectangles and ellipses of object classes. Image m's last
// painted blob has class 1 + (m mod (num_classes - 1)), so every object class
// is present once n_images >= num_classes - 1.
SynthCorpus GenerateCorpus(const SynthConfig& config);

// Same generator keyed by an arbitrary id prefix and stream label; used to
// build labeled training sets disjoint from the corpus.
std::map<std::string, LabelMap> GenerateLabeledSet(const SynthConfig& config,
                                                   std::string_view prefix,
                                                   std::string_view stream);

// Each non-ignored pixel is replaced, with probability `rate`, by a uniformly
// drawn different class. Deterministic in (seed, image_id).
LabelMap Corrupt(const LabelMap& gt, double rate, int num_classes,
                 std::uint64_t seed, std::string_view image_id);

// Model k corrupts every ground truth at noise_rates[k]. Model ids are
// "model_<k>" unless `model_ids` is given.
std::vector<PredictionStore> MakeModels(const SynthCorpus& corpus,
                                        const SynthConfig& config,
                                        std::span<const std::string> model_ids = {});

// Reference scores computed per pixel and per class, without a confusion
// matrix.
double BruteForceMetric(const LabelMap& a, const LabelMap& b, MetricKind metric,
                        const ClassCatalog& catalog);

// Exhaustive MAD selection over every (ordered pair, category, image).
MadSet BruteForceSelect(std::span<const PredictionStore> stores, const Corpus& corpus,
                        const ScaleStats& stats, const ClassCatalog& catalog,
                        const SelectionOptions& options);

// Scripted 2AFC rater.
class ChoiceOracle {
 public:
  enum class Policy { kTruthMetric, kFixedWinner, kNoisy };

  // Picks the model whose prediction scores higher against the truth; ties
  // go to the defender.
  static ChoiceOracle TruthMetric(const std::map<std::string, LabelMap>* truth,
                                  std::span<const PredictionStore> stores,
                                  const ClassCatalog* catalog, MetricKind metric);
  // `winner` wins every trial it takes part in; other trials go to the
  // defender.
  static ChoiceOracle FixedWinner(std::string winner);
  // Truth-metric choice flipped with probability `flip`.
  static ChoiceOracle Noisy(ChoiceOracle truth, double flip, std::uint64_t seed);

  Policy policy() const { return policy_; }

  // Returns the winning model id for one trial.
  std::string Choose(const SelectionRecord& record, std::string_view trial_id) const;

 private:
  Policy policy_ = Policy::kFixedWinner;
  std::string winner_;
  const std::map<std::string, LabelMap>* truth_ = nullptr;
  std::vector<PredictionStore> stores_;
  const ClassCatalog* catalog_ = nullptr;
  MetricKind metric_ = MetricKind::kMiou;
  double flip_ = 0.0;
  std::uint64_t seed_ = 0;
};

}  // namespace madseg::synth

#endif  // MADSEG_SYNTH_H_
