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
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "madseg/ranking.h"

namespace madseg {

std::string_view OutcomeName(OutcomeCase outcome) {
  switch (outcome) {
    case OutcomeCase::kBothGood:
      return "both_good";
    case OutcomeCase::kOneFails:
      return "one_fails";
    case OutcomeCase::kBothFail:
      return "both_fail";
  }
  return "unknown";
}

OutcomeCase ClassifyOutcome(double defender_score, double attacker_score,
                            double threshold) {
  const bool defender_ok = defender_score >= threshold;
  const bool attacker_ok = attacker_score >= threshold;
  if (defender_ok && attacker_ok) return OutcomeCase::kBothGood;
  if (!defender_ok && !attacker_ok) return OutcomeCase::kBothFail;
  return OutcomeCase::kOneFails;
}

void OutcomeTally::Add(OutcomeCase outcome) {
  switch (outcome) {
    case OutcomeCase::kBothGood:
      ++both_good;
      break;
    case OutcomeCase::kOneFails:
      ++one_fails;
      break;
    case OutcomeCase::kBothFail:
      ++both_fail;
      break;
  }
}

OutcomeReport TallyOutcomes(PerformanceEvaluator& evaluator, const MadSet& mad,
                            double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("outcome threshold must lie in (0, 1)");
  }
  evaluator.RequireAnnotations(mad);
  OutcomeReport report;
  report.threshold = threshold;
  for (const auto& r : mad.records()) {
    const int d = evaluator.IndexOf(r.defender);
    const int a = evaluator.IndexOf(r.attacker);
    if (d < 0 || a < 0) {
      throw NotFound("MAD record references unknown model '" +
                     (d < 0 ? r.defender : r.attacker) + "'");
    }
    const auto outcome = ClassifyOutcome(evaluator.ImageScore(d, r.image_id),
                                         evaluator.ImageScore(a, r.image_id), threshold);
    report.overall.Add(outcome);
    report.per_pair[{r.defender, r.attacker}].Add(outcome);
  }
  return report;
}

SubsetSplit SplitSubsets(const MadSet& mad, std::string_view model_id) {
  std::set<std::string> associated;
  for (const auto& r : mad.records()) {
    if (r.defender == model_id || r.attacker == model_id) associated.insert(r.image_id);
  }
  if (associated.empty()) {
    throw NotFound("model '" + std::string(model_id) +
                   "' does not appear in any MAD record");
  }
  SubsetSplit split;
  split.associated.assign(associated.begin(), associated.end());
  for (const auto& id : mad.images()) {
    if (!associated.count(id)) split.remaining.push_back(id);
  }
  return split;
}

std::vector<SubsetScores> SummarizeSubsets(PerformanceEvaluator& evaluator,
                                           const MadSet& mad) {
  evaluator.RequireAnnotations(mad);
  std::vector<SubsetScores> out;
  for (int m = 0; m < evaluator.num_models(); ++m) {
    SubsetScores s;
    s.model_id = evaluator.model_id(m);
    try {
      s.split = SplitSubsets(mad, s.model_id);
    } catch (const NotFound&) {
      s.split.remaining.assign(mad.images().begin(), mad.images().end());
    }
    auto summarize = [&](const std::vector<std::string>& ids) -> std::optional<Summary> {
      if (ids.empty()) return std::nullopt;
      std::vector<double> scores;
      scores.reserve(ids.size());
      for (const auto& id : ids) scores.push_back(evaluator.ImageScore(m, id));
      return Summarize(scores);
    };
    s.associated = summarize(s.split.associated);
    s.remaining = summarize(s.split.remaining);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double Srcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("SRCC inputs differ in length (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw InvalidArgument("SRCC needs at least two items");
  const auto ra = AverageRanks(a);
  const auto rb = AverageRanks(b);
  const double n = static_cast<double>(ra.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean_a) * (rb[i] - mean_b);
    var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
    var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw InvalidArgument("SRCC is undefined for a constant input");
  }
  return cov / std::sqrt(var_a * var_b);
}

CompetitionMatrices PairwiseFrom2afc(std::span<const std::string> model_ids,
                                     std::span<const PairwiseOutcome> outcomes,
                                     const RankingConfig& config) {
  config.Validate();
  const int n = static_cast<int>(model_ids.size());
  auto index_of = [&](const std::string& id) {
    for (int i = 0; i < n; ++i) {
      if (model_ids[i] == id) return i;
    }
    throw NotFound("2AFC outcome references unknown model '" + id + "'");
  };
  // wins[(defender * n + attacker) * 2 + side], side 0 = defender won.
  std::vector<int> wins(static_cast<std::size_t>(n) * n * 2, 0);
  for (const auto& o : outcomes) {
    const int d = index_of(o.defender);
    const int a = index_of(o.attacker);
    if (d == a) throw InvalidArgument("2AFC outcome pits a model against itself");
    int side = 0;
    if (o.winner == o.attacker) {
      side = 1;
    } else if (o.winner != o.defender) {
      throw InvalidArgument("2AFC winner '" + o.winner + "' is not in its pair");
    }
    ++wins[(static_cast<std::size_t>(d) * n + a) * 2 + side];
  }

  const std::vector<std::string> ids(model_ids.begin(), model_ids.end());
  CompetitionMatrices out{PairMatrix::Identity(ids, MatrixKind::kAggressiveness),
                          PairMatrix::Identity(ids, MatrixKind::kResistance),
                          {}};
  const double s = config.afc_smoothing;
  auto cell = [&](int defender, int attacker, int side) {
    return wins[(static_cast<std::size_t>(defender) * n + attacker) * 2 + side];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // Aggressiveness of i over j: trials where j defended against i.
      const int agg_i = cell(j, i, 1);
      const int agg_j = cell(j, i, 0);
      if (agg_i + agg_j == 0) {
        out.aggressiveness.at(i, j) = 1.0;
        out.warnings.push_back("no 2AFC trials with defender '" + ids[j] +
                               "' and attacker '" + ids[i] + "'; a(" + ids[i] + ", " +
                               ids[j] + ") set to 1");
      } else {
        out.aggressiveness.at(i, j) = (agg_i + s) / (agg_j + s);
      }
      // Resistance of i against j: trials where i defended against j.
      const int res_i = cell(i, j, 0);
      const int res_j = cell(i, j, 1);
      if (res_i + res_j == 0) {
        out.resistance.at(i, j) = 1.0;
        out.warnings.push_back("no 2AFC trials with defender '" + ids[i] +
                               "' and attacker '" + ids[j] + "'; r(" + ids[i] + ", " +
                               ids[j] + ") set to 1");
      } else {
        out.resistance.at(i, j) = (res_i + s) / (res_j + s);
      }
      if (!std::isfinite(out.aggressiveness.at(i, j)) ||
          !std::isfinite(out.resistance.at(i, j))) {
        throw InvalidArgument("2AFC ratio is not finite; use a positive smoothing constant");
      }
    }
  }
  return out;
}

}  // namespace madseg
