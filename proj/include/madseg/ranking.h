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

#ifndef MADSEG_RANKING_H_
#define MADSEG_RANKING_H_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "madseg/error.h"
#include "madseg/segmap.h"
#include "madseg/selection.h"
#include "madseg/statistics.h"

namespace madseg {

// Dense human labels for (at least) the MAD-set images.
class AnnotationStore {
 public:
  static AnnotationStore InMemory(std::map<std::string, LabelMap> maps);
  static AnnotationStore FromDirectory(std::filesystem::path dir,
                                       ClassCatalog catalog);

  bool Contains(const std::string& image_id) const {
    return maps_.Contains(image_id);
  }
  // Throws NotFound.
  std::shared_ptr<const LabelMap> Load(const std::string& image_id) const;

  // Ids from `image_ids` that have no annotation, in input order.
  std::vector<std::string> Missing(std::span<const std::string> image_ids) const;

 private:
  explicit AnnotationStore(PredictionStore maps) : maps_(std::move(maps)) {}

  PredictionStore maps_;
};

enum class MatrixKind { kAggressiveness, kResistance };

std::string_view MatrixKindName(MatrixKind kind);

// J x J comparison matrix; row model vs column model, ones on the diagonal.
struct PairMatrix {
  std::vector<std::string> model_ids;
  std::vector<double> values;  // row-major
  MatrixKind kind = MatrixKind::kAggressiveness;

  static PairMatrix Identity(std::vector<std::string> model_ids, MatrixKind kind);

  int size() const { return static_cast<int>(model_ids.size()); }
  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * size() + col];
  }
  double& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * size() + col];
  }
  int IndexOf(std::string_view model_id) const;  // -1 when absent

  // Header row "model,<id>...", one row per model. Values round-trip exactly.
  std::string ToCsv(std::span<const std::string> comment_lines = {}) const;
  static PairMatrix FromCsv(std::string_view text, MatrixKind kind);

  friend bool operator==(const PairMatrix&, const PairMatrix&) = default;
};

enum class Gauge { kZeroSum, kFirstZero, kUnitSum };

std::string_view GaugeName(Gauge gauge);  // "zero-sum", "first-zero", "unit-sum"
Gauge ParseGauge(std::string_view name);

struct RankingConfig {
  double epsilon = 1e-6;        // Laplace constant on both sides of a ratio
  Gauge gauge = Gauge::kZeroSum;
  double tolerance = 1e-9;      // on the gradient norm, see MleRank
  int max_iterations = 10000;
  double phi_floor = 1e-12;     // lower clamp for the Gaussian CDF inside log
  double afc_smoothing = 0.5;   // additive constant on 2AFC win counts

  void Validate() const;
};

struct RankingVector {
  std::vector<std::string> model_ids;
  std::vector<double> mu;
  Gauge gauge = Gauge::kZeroSum;
  double log_likelihood = 0.0;
  int iterations = 0;

  // 1-based competition ranks; larger mu ranks first, ties keep model order.
  std::vector<int> Ranks() const;
  // Model ids from first to last place.
  std::vector<std::string> Order() const;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm)
      : Error(what), gradient_norm_(gradient_norm) {}
  double gradient_norm() const { return gradient_norm_; }

 private:
  double gradient_norm_;
};

// Scores each model prediction against the ground truth once and aggregates
// per-subset performance.
class PerformanceEvaluator {
 public:
  PerformanceEvaluator(std::span<const PredictionStore> stores,
                       const AnnotationStore& truth, const ClassCatalog& catalog,
                       MetricKind metric);

  int num_models() const { return static_cast<int>(stores_.size()); }
  const std::string& model_id(int model) const { return stores_[model].model_id(); }
  int IndexOf(std::string_view model_id) const;  // -1 when absent

  // Concordance of the model's prediction with the ground truth.
  double ImageScore(int model, const std::string& image_id);

  // Mean over the categories present in `subset` of the per-category mean
  // image score. Throws InvalidArgument on an empty subset.
  double Perf(int model, std::span<const SelectionRecord> subset);

  // Throws NotFound listing every MAD image without a ground truth.
  void RequireAnnotations(const MadSet& mad) const;

 private:
  std::span<const PredictionStore> stores_;
  const AnnotationStore& truth_;
  const ClassCatalog& catalog_;
  MetricKind metric_;
  std::vector<std::map<std::string, double>> cache_;
};

double Perf(const PredictionStore& model, std::span<const SelectionRecord> subset,
            const AnnotationStore& truth, const ClassCatalog& catalog,
            MetricKind metric);

struct CompetitionMatrices {
  PairMatrix aggressiveness;
  PairMatrix resistance;
  // One line per matrix entry that had no selected images and was set to 1.
  std::vector<std::string> warnings;
};

// a_ij = (P(f_i; S_ji) + eps) / (P(f_j; S_ji) + eps) and
// r_ij = (P(f_i; S_ij) + eps) / (P(f_j; S_ij) + eps), where S_ij holds the
// records with defender i and attacker j.
CompetitionMatrices BuildMatrices(std::span<const PredictionStore> stores,
                                  const MadSet& mad, const AnnotationStore& truth,
                                  const ClassCatalog& catalog, MetricKind metric,
                                  const RankingConfig& config);

CompetitionMatrices BuildMatrices(PerformanceEvaluator& evaluator,
                                  const MadSet& mad, const RankingConfig& config);

// L(mu) = sum over i != j of m_ij log Phi(mu_i - mu_j).
double LogLikelihood(const PairMatrix& m, std::span<const double> mu,
                     const RankingConfig& config);
std::vector<double> LogLikelihoodGradient(const PairMatrix& m,
                                          std::span<const double> mu,
                                          const RankingConfig& config);

// Thurstone maximum-likelihood scores by gradient ascent from mu = 0, then
// shifted into the configured gauge. Throws ConvergenceError when the
// gradient norm does not drop below tolerance * max(1, max |m_ij|) within
// max_iterations.
RankingVector MleRank(const PairMatrix& m, const RankingConfig& config);

struct CompetitionState {
  PairMatrix aggressiveness;
  PairMatrix resistance;
  MadSet mad;
};

struct ExpandedCompetition {
  CompetitionMatrices matrices;
  RankingVector aggressiveness_ranking;
  RankingVector resistance_ranking;
};

// Selection for the 2J ordered pairs that involve the last store: for each
// incumbent i, (i, new) followed by (new, i).
MadSet SelectForNewModel(std::span<const PredictionStore> stores,
                         const Corpus& corpus, const ScaleStats& stats,
                         const ClassCatalog& catalog,
                         const SelectionOptions& options);

// Grows A and R by one row and column for the last store. The prior J x J
// blocks are copied unchanged; the new entries come from `delta`. The prior
// model ids must equal the first J store ids, in order.
ExpandedCompetition ExpandCompetition(const CompetitionState& prior,
                                      std::span<const PredictionStore> stores,
                                      const MadSet& delta,
                                      const AnnotationStore& truth,
                                      const ClassCatalog& catalog,
                                      MetricKind metric,
                                      const RankingConfig& config);

enum class OutcomeCase { kBothGood, kOneFails, kBothFail };

std::string_view OutcomeName(OutcomeCase outcome);

// Both >= threshold: kBothGood; both below: kBothFail; otherwise kOneFails.
OutcomeCase ClassifyOutcome(double defender_score, double attacker_score,
                            double threshold);

struct OutcomeTally {
  int both_good = 0;
  int one_fails = 0;
  int both_fail = 0;

  int total() const { return both_good + one_fails + both_fail; }
  void Add(OutcomeCase outcome);
};

struct OutcomeReport {
  double threshold = 0.6;
  OutcomeTally overall;
  std::map<std::pair<std::string, std::string>, OutcomeTally> per_pair;
};

OutcomeReport TallyOutcomes(PerformanceEvaluator& evaluator, const MadSet& mad,
                            double threshold);

struct SubsetSplit {
  std::vector<std::string> associated;  // U: images in a record with the model
  std::vector<std::string> remaining;   // V: every other MAD image
};

// Throws NotFound when the model appears in no record.
SubsetSplit SplitSubsets(const MadSet& mad, std::string_view model_id);

struct SubsetScores {
  std::string model_id;
  SubsetSplit split;
  std::optional<Summary> associated;
  std::optional<Summary> remaining;
};

std::vector<SubsetScores> SummarizeSubsets(PerformanceEvaluator& evaluator,
                                           const MadSet& mad);

// Spearman rank correlation with average ranks for ties. Throws
// InvalidArgument on length mismatch, fewer than two items, or a constant
// input.
double Srcc(std::span<const double> a, std::span<const double> b);

// One resolved forced choice: which of the two models in a MAD record won.
struct PairwiseOutcome {
  std::string defender;
  std::string attacker;
  std::string winner;
};

// Win-count ratios with additive smoothing: a_ij over trials whose record has
// defender j and attacker i, r_ij over trials with defender i and attacker j.
CompetitionMatrices PairwiseFrom2afc(std::span<const std::string> model_ids,
                                     std::span<const PairwiseOutcome> outcomes,
                                     const RankingConfig& config);

}  // namespace madseg

#endif  // MADSEG_RANKING_H_
