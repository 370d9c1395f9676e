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
#include <atomic>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "madseg/error.h"
#include "madseg/selection.h"

namespace madseg {
namespace {

bool IsSymmetric(MetricKind metric) { return metric == MetricKind::kMiou; }

// Everything the selection loop needs from one corpus image.
struct ImageScan {
  std::vector<std::vector<std::uint64_t>> counts;  // [model][class]
  std::vector<std::uint64_t> totals;               // non-ignored pixels
  std::vector<double> concordance;                 // [defender * J + attacker]
};

// The concordances one scan must produce. For a symmetric metric only the
// (min, max) ordering of each unordered pair is computed.
std::vector<ModelPair> RequiredScores(std::span<const ModelPair> pairs,
                                      MetricKind metric, int num_models) {
  std::vector<char> needed(static_cast<std::size_t>(num_models) * num_models, 0);
  std::vector<ModelPair> out;
  for (const auto& p : pairs) {
    ModelPair key = p;
    if (IsSymmetric(metric) && key.defender > key.attacker) {
      std::swap(key.defender, key.attacker);
    }
    auto& flag = needed[static_cast<std::size_t>(key.defender) * num_models + key.attacker];
    if (flag) continue;
    flag = 1;
    out.push_back(key);
  }
  return out;
}

ImageScan ScanImage(const std::string& image_id,
                    std::span<const PredictionStore> stores,
                    std::span<const int> involved,
                    std::span<const ModelPair> scores, const ClassCatalog& catalog,
                    MetricKind metric) {
  const int num_models = static_cast<int>(stores.size());
  std::vector<std::shared_ptr<const LabelMap>> maps(num_models);
  ImageScan scan;
  scan.counts.resize(num_models);
  scan.totals.assign(num_models, 0);
  scan.concordance.assign(static_cast<std::size_t>(num_models) * num_models, 0.0);
  for (int m : involved) {
    maps[m] = stores[m].Load(image_id);
    scan.counts[m] = ClassCounts(*maps[m], catalog);
    for (auto c : scan.counts[m]) scan.totals[m] += c;
  }
  for (const auto& s : scores) {
    double value = 0.0;
    try {
      value = Concordance(*maps[s.defender], *maps[s.attacker], metric, catalog);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("image '" + image_id + "', models '" +
                            stores[s.defender].model_id() + "' vs '" +
                            stores[s.attacker].model_id() + "': " + e.what());
    }
    scan.concordance[static_cast<std::size_t>(s.defender) * num_models + s.attacker] = value;
    if (IsSymmetric(metric)) {
      scan.concordance[static_cast<std::size_t>(s.attacker) * num_models + s.defender] = value;
    }
  }
  return scan;
}

// Scans every corpus image, `jobs` workers at a time. Results land at the
// image's corpus index, so the outcome does not depend on scheduling. When
// several images fail, the error of the first one in corpus order wins.
std::vector<ImageScan> ScanCorpus(const Corpus& corpus,
                                  std::span<const PredictionStore> stores,
                                  std::span<const int> involved,
                                  std::span<const ModelPair> scores,
                                  const ClassCatalog& catalog, MetricKind metric,
                                  int jobs) {
  const std::size_t n = corpus.size();
  std::vector<ImageScan> scans(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        scans[i] = ScanImage(corpus.images()[i].image_id, stores, involved, scores,
                             catalog, metric);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return scans;
}

double Proportion(const ImageScan& scan, int model, int category) {
  if (scan.totals[model] == 0) return 0.0;
  return static_cast<double>(scan.counts[model][category]) /
         static_cast<double>(scan.totals[model]);
}

}  // namespace

std::vector<std::vector<std::string>> GroupByDefender(
    const PredictionStore& defender, const Corpus& corpus,
    const ClassCatalog& catalog) {
  std::vector<std::vector<std::string>> groups(catalog.num_classes());
  for (const auto& ref : corpus.images()) {
    const auto counts = ClassCounts(*defender.Load(ref.image_id), catalog);
    for (int y = 1; y < catalog.num_classes(); ++y) {
      if (counts[y] > 0) groups[y].push_back(ref.image_id);
    }
  }
  return groups;
}

std::vector<std::string> ScaleFilter(std::span<const std::string> group,
                                     const PredictionStore& source, int category,
                                     const ScaleStats& stats,
                                     const ClassCatalog& catalog) {
  if (!stats.Get(category)) return {group.begin(), group.end()};
  std::vector<std::string> kept;
  for (const auto& id : group) {
    const auto counts = ClassCounts(*source.Load(id), catalog);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double proportion =
        total == 0 ? 0.0
                   : static_cast<double>(counts[category]) / static_cast<double>(total);
    if (stats.Admits(category, proportion)) kept.push_back(id);
  }
  return kept;
}

std::vector<SelectionRecord> SelectTopK(std::span<const ScoredImage> candidates,
                                        std::string_view defender,
                                        std::string_view attacker, int category,
                                        MetricKind metric, int k) {
  if (k < 1) throw InvalidArgument("K must be at least 1, got " + std::to_string(k));
  std::vector<const ScoredImage*> order;
  order.reserve(candidates.size());
  for (const auto& c : candidates) order.push_back(&c);
  const std::size_t take = std::min<std::size_t>(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [](const ScoredImage* a, const ScoredImage* b) {
                      if (a->concordance != b->concordance) {
                        return a->concordance < b->concordance;
                      }
                      return a->image_id < b->image_id;
                    });
  std::vector<SelectionRecord> records;
  records.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    records.push_back(SelectionRecord{order[i]->image_id, std::string(defender),
                                      std::string(attacker), category,
                                      order[i]->concordance, metric,
                                      static_cast<int>(i + 1)});
  }
  return records;
}

std::vector<ModelPair> AllOrderedPairs(int num_models) {
  std::vector<ModelPair> pairs;
  for (int i = 0; i < num_models; ++i) {
    for (int j = 0; j < num_models; ++j) {
      if (i != j) pairs.push_back(ModelPair{i, j});
    }
  }
  return pairs;
}

MadSet SelectPairs(std::span<const PredictionStore> stores, const Corpus& corpus,
                   const ScaleStats& stats, const ClassCatalog& catalog,
                   const SelectionOptions& options,
                   std::span<const ModelPair> pairs) {
  const int num_models = static_cast<int>(stores.size());
  if (num_models < 2) throw InvalidArgument("MAD selection needs at least two models");
  if (options.k < 1) {
    throw InvalidArgument("K must be at least 1, got " + std::to_string(options.k));
  }
  if (stats.num_classes() != catalog.num_classes()) {
    throw InvalidArgument("scale stats and class catalog disagree on the class count");
  }
  for (int i = 0; i < num_models; ++i) {
    for (int j = i + 1; j < num_models; ++j) {
      if (stores[i].model_id() == stores[j].model_id()) {
        throw InvalidArgument("duplicate model id '" + stores[i].model_id() + "'");
      }
    }
  }
  std::vector<char> is_involved(num_models, 0);
  for (const auto& p : pairs) {
    if (p.defender < 0 || p.defender >= num_models || p.attacker < 0 ||
        p.attacker >= num_models || p.defender == p.attacker) {
      throw InvalidArgument("invalid model pair (" + std::to_string(p.defender) +
                            ", " + std::to_string(p.attacker) + ")");
    }
    is_involved[p.defender] = is_involved[p.attacker] = 1;
  }
  std::vector<int> involved;
  for (int m = 0; m < num_models; ++m) {
    if (is_involved[m]) involved.push_back(m);
  }

  const auto scores = RequiredScores(pairs, options.metric, num_models);
  const auto scans = ScanCorpus(corpus, stores, involved, scores, catalog,
                                options.metric, options.jobs);

  MadSet mad;
  std::vector<ScoredImage> candidates;
  for (const auto& p : pairs) {
    const auto cell = static_cast<std::size_t>(p.defender) * num_models + p.attacker;
    for (int y = 1; y < catalog.num_classes(); ++y) {
      candidates.clear();
      for (std::size_t i = 0; i < scans.size(); ++i) {
        const auto& scan = scans[i];
        if (scan.counts[p.defender][y] == 0) continue;
        bool admitted = true;
        if (options.scale_source != ScaleSource::kAttacker) {
          admitted = stats.Admits(y, Proportion(scan, p.defender, y));
        }
        if (admitted && options.scale_source != ScaleSource::kDefender) {
          admitted = stats.Admits(y, Proportion(scan, p.attacker, y));
        }
        if (!admitted) continue;
        candidates.push_back(
            ScoredImage{corpus.images()[i].image_id, scan.concordance[cell]});
      }
      for (auto& r : SelectTopK(candidates, stores[p.defender].model_id(),
                                stores[p.attacker].model_id(), y, options.metric,
                                options.k)) {
        mad.Add(std::move(r));
      }
    }
  }
  return mad;
}

MadSet RunPairwiseSelection(std::span<const PredictionStore> stores,
                            const Corpus& corpus, const ScaleStats& stats,
                            const ClassCatalog& catalog,
                            const SelectionOptions& options) {
  const auto pairs = AllOrderedPairs(static_cast<int>(stores.size()));
  return SelectPairs(stores, corpus, stats, catalog, options, pairs);
}

}  // namespace madseg
