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

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "madseg/ranking.h"

namespace madseg {

AnnotationStore AnnotationStore::InMemory(std::map<std::string, LabelMap> maps) {
  return AnnotationStore(PredictionStore::InMemory("ground truth", std::move(maps)));
}

AnnotationStore AnnotationStore::FromDirectory(std::filesystem::path dir,
                                               ClassCatalog catalog) {
  return AnnotationStore(
      PredictionStore::FromDirectory("ground truth", std::move(dir), std::move(catalog)));
}

std::shared_ptr<const LabelMap> AnnotationStore::Load(const std::string& image_id) const {
  if (!maps_.Contains(image_id)) {
    throw NotFound("no ground-truth annotation for image '" + image_id + "'");
  }
  return maps_.Load(image_id);
}

std::vector<std::string> AnnotationStore::Missing(
    std::span<const std::string> image_ids) const {
  std::vector<std::string> missing;
  for (const auto& id : image_ids) {
    if (!maps_.Contains(id)) missing.push_back(id);
  }
  return missing;
}

PerformanceEvaluator::PerformanceEvaluator(std::span<const PredictionStore> stores,
                                           const AnnotationStore& truth,
                                           const ClassCatalog& catalog,
                                           MetricKind metric)
    : stores_(stores),
      truth_(truth),
      catalog_(catalog),
      metric_(metric),
      cache_(stores.size()) {}

int PerformanceEvaluator::IndexOf(std::string_view model_id) const {
  for (int i = 0; i < num_models(); ++i) {
    if (stores_[i].model_id() == model_id) return i;
  }
  return -1;
}

double PerformanceEvaluator::ImageScore(int model, const std::string& image_id) {
  auto& cache = cache_[model];
  if (auto it = cache.find(image_id); it != cache.end()) return it->second;
  const auto gt = truth_.Load(image_id);
  const auto pred = stores_[model].Load(image_id);
  const double score = Concordance(*pred, *gt, metric_, catalog_);
  cache.emplace(image_id, score);
  return score;
}

double PerformanceEvaluator::Perf(int model, std::span<const SelectionRecord> subset) {
  if (subset.empty()) throw InvalidArgument("performance of an empty subset");
  // category -> (sum, count)
  std::map<int, std::pair<double, int>> per_category;
  for (const auto& r : subset) {
    auto& cell = per_category[r.category];
    cell.first += ImageScore(model, r.image_id);
    cell.second += 1;
  }
  double sum = 0.0;
  for (const auto& [category, cell] : per_category) sum += cell.first / cell.second;
  return sum / static_cast<double>(per_category.size());
}

void PerformanceEvaluator::RequireAnnotations(const MadSet& mad) const {
  const std::vector<std::string> ids(mad.images().begin(), mad.images().end());
  const auto missing = truth_.Missing(ids);
  if (missing.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (i > 0) list += ", ";
    list += missing[i];
  }
  throw NotFound(std::to_string(missing.size()) +
                 " MAD image(s) lack ground-truth annotations: " + list);
}

double Perf(const PredictionStore& model, std::span<const SelectionRecord> subset,
            const AnnotationStore& truth, const ClassCatalog& catalog,
            MetricKind metric) {
  PerformanceEvaluator evaluator(std::span<const PredictionStore>(&model, 1), truth,
                                 catalog, metric);
  return evaluator.Perf(0, subset);
}

namespace {

using SubsetIndex =
    std::map<std::pair<std::string, std::string>, std::vector<SelectionRecord>>;

SubsetIndex IndexSubsets(const MadSet& mad) {
  SubsetIndex index;
  for (const auto& r : mad.records()) index[{r.defender, r.attacker}].push_back(r);
  return index;
}

double SmoothedRatio(double numerator, double denominator, double epsilon,
                     const std::string& what) {
  const double ratio = (numerator + epsilon) / (denominator + epsilon);
  if (!std::isfinite(ratio)) {
    throw InvalidArgument(what + " is not finite (" + std::to_string(numerator) +
                          " / " + std::to_string(denominator) +
                          "); use a positive epsilon");
  }
  return ratio;
}

// Fills a_ij and r_ij (row model i, column model j) from the subsets in
// `index`. Evaluator indices and matrix indices may differ.
void FillEntries(PerformanceEvaluator& evaluator, const SubsetIndex& index,
                 int eval_i, int eval_j, int row, int col,
                 const RankingConfig& config, CompetitionMatrices& out) {
  const std::string& id_i = evaluator.model_id(eval_i);
  const std::string& id_j = evaluator.model_id(eval_j);

  // Aggressiveness: images j defended against i.
  if (auto it = index.find({id_j, id_i}); it != index.end()) {
    out.aggressiveness.at(row, col) = SmoothedRatio(
        evaluator.Perf(eval_i, it->second), evaluator.Perf(eval_j, it->second),
        config.epsilon, "a(" + id_i + ", " + id_j + ")");
  } else {
    out.aggressiveness.at(row, col) = 1.0;
    out.warnings.push_back("no MAD images with defender '" + id_j + "' and attacker '" +
                           id_i + "'; a(" + id_i + ", " + id_j + ") set to 1");
  }

  // Resistance: images i defended against j.
  if (auto it = index.find({id_i, id_j}); it != index.end()) {
    out.resistance.at(row, col) = SmoothedRatio(
        evaluator.Perf(eval_i, it->second), evaluator.Perf(eval_j, it->second),
        config.epsilon, "r(" + id_i + ", " + id_j + ")");
  } else {
    out.resistance.at(row, col) = 1.0;
    out.warnings.push_back("no MAD images with defender '" + id_i + "' and attacker '" +
                           id_j + "'; r(" + id_i + ", " + id_j + ") set to 1");
  }
}

std::vector<std::string> EvaluatorIds(const PerformanceEvaluator& evaluator) {
  std::vector<std::string> ids;
  for (int i = 0; i < evaluator.num_models(); ++i) ids.push_back(evaluator.model_id(i));
  return ids;
}

}  // namespace

CompetitionMatrices BuildMatrices(PerformanceEvaluator& evaluator, const MadSet& mad,
                                  const RankingConfig& config) {
  config.Validate();
  evaluator.RequireAnnotations(mad);
  const auto ids = EvaluatorIds(evaluator);
  CompetitionMatrices out{PairMatrix::Identity(ids, MatrixKind::kAggressiveness),
                          PairMatrix::Identity(ids, MatrixKind::kResistance),
                          {}};
  const auto index = IndexSubsets(mad);
  for (int i = 0; i < evaluator.num_models(); ++i) {
    for (int j = 0; j < evaluator.num_models(); ++j) {
      if (i != j) FillEntries(evaluator, index, i, j, i, j, config, out);
    }
  }
  return out;
}

CompetitionMatrices BuildMatrices(std::span<const PredictionStore> stores,
                                  const MadSet& mad, const AnnotationStore& truth,
                                  const ClassCatalog& catalog, MetricKind metric,
                                  const RankingConfig& config) {
  PerformanceEvaluator evaluator(stores, truth, catalog, metric);
  return BuildMatrices(evaluator, mad, config);
}

MadSet SelectForNewModel(std::span<const PredictionStore> stores, const Corpus& corpus,
                         const ScaleStats& stats, const ClassCatalog& catalog,
                         const SelectionOptions& options) {
  const int newcomer = static_cast<int>(stores.size()) - 1;
  if (newcomer < 1) throw InvalidArgument("adding a model needs at least one incumbent");
  std::vector<ModelPair> pairs;
  for (int i = 0; i < newcomer; ++i) {
    pairs.push_back(ModelPair{i, newcomer});
    pairs.push_back(ModelPair{newcomer, i});
  }
  return SelectPairs(stores, corpus, stats, catalog, options, pairs);
}

ExpandedCompetition ExpandCompetition(const CompetitionState& prior,
                                      std::span<const PredictionStore> stores,
                                      const MadSet& delta, const AnnotationStore& truth,
                                      const ClassCatalog& catalog, MetricKind metric,
                                      const RankingConfig& config) {
  config.Validate();
  const int incumbents = prior.aggressiveness.size();
  if (prior.resistance.model_ids != prior.aggressiveness.model_ids) {
    throw InvalidArgument("prior A and R cover different models");
  }
  if (static_cast<int>(stores.size()) != incumbents + 1) {
    throw InvalidArgument("expected " + std::to_string(incumbents + 1) +
                          " prediction stores (incumbents plus the new model), got " +
                          std::to_string(stores.size()));
  }
  for (int i = 0; i < incumbents; ++i) {
    if (stores[i].model_id() != prior.aggressiveness.model_ids[i]) {
      throw InvalidArgument("prior state lists model '" +
                            prior.aggressiveness.model_ids[i] + "' at position " +
                            std::to_string(i) + " but the store there is '" +
                            stores[i].model_id() + "'");
    }
  }
  const std::string& newcomer = stores[incumbents].model_id();
  if (prior.aggressiveness.IndexOf(newcomer) >= 0) {
    throw InvalidArgument("model '" + newcomer + "' already competes");
  }

  auto ids = prior.aggressiveness.model_ids;
  ids.push_back(newcomer);
  CompetitionMatrices out{PairMatrix::Identity(ids, MatrixKind::kAggressiveness),
                          PairMatrix::Identity(ids, MatrixKind::kResistance),
                          {}};
  for (int i = 0; i < incumbents; ++i) {
    for (int j = 0; j < incumbents; ++j) {
      out.aggressiveness.at(i, j) = prior.aggressiveness.at(i, j);
      out.resistance.at(i, j) = prior.resistance.at(i, j);
    }
  }

  PerformanceEvaluator evaluator(stores, truth, catalog, metric);
  evaluator.RequireAnnotations(delta);
  const auto index = IndexSubsets(delta);
  for (int i = 0; i < incumbents; ++i) {
    FillEntries(evaluator, index, i, incumbents, i, incumbents, config, out);
    FillEntries(evaluator, index, incumbents, i, incumbents, i, config, out);
  }

  ExpandedCompetition expanded{std::move(out), {}, {}};
  expanded.aggressiveness_ranking = MleRank(expanded.matrices.aggressiveness, config);
  expanded.resistance_ranking = MleRank(expanded.matrices.resistance, config);
  return expanded;
}

}  // namespace madseg
