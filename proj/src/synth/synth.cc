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

#include "madseg/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "madseg/error.h"
#include "madseg/hash.h"

namespace madseg::synth {
namespace {

std::uint64_t Rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string ImageId(std::string_view prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%05d", index);
  return std::string(prefix) + buf;
}

LabelMap PaintImage(const SynthConfig& config, Rng& rng, int guaranteed_class) {
  LabelMap map(config.width, config.height, kBackgroundId);
  const int blobs = rng.Between(config.min_blobs, config.max_blobs);
  const int min_rx = std::max(1, config.width / 20);
  const int min_ry = std::max(1, config.height / 20);
  const int max_rx = std::max(min_rx, config.width * 7 / 20);
  const int max_ry = std::max(min_ry, config.height * 7 / 20);
  for (int b = 0; b < blobs; ++b) {
    const int cls = b == blobs - 1
                        ? guaranteed_class
                        : 1 + static_cast<int>(rng.Below(config.num_classes - 1));
    const bool ellipse = rng.Below(2) == 1;
    const int cx = static_cast<int>(rng.Below(config.width));
    const int cy = static_cast<int>(rng.Below(config.height));
    const int rx = rng.Between(min_rx, max_rx);
    const int ry = rng.Between(min_ry, max_ry);
    const int x0 = std::max(0, cx - rx), x1 = std::min(config.width - 1, cx + rx);
    const int y0 = std::max(0, cy - ry), y1 = std::min(config.height - 1, cy + ry);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (ellipse) {
          const double dx = static_cast<double>(x - cx) / rx;
          const double dy = static_cast<double>(y - cy) / ry;
          if (dx * dx + dy * dy > 1.0) continue;
        }
        map.set(x, y, static_cast<ClassId>(cls));
      }
    }
  }
  return map;
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = MixSeed(x);
  }
}

Rng Rng::Stream(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return Rng(Fnv1a().Update(seed).Update(label).Update(index).digest());
}

std::uint64_t Rng::Next() {
  const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::Below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("Rng::Below needs a positive bound");
  unsigned __int128 m = static_cast<unsigned __int128>(Next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(Next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

int Rng::Between(int lo, int hi) {
  if (hi < lo) throw InvalidArgument("Rng::Between with an empty range");
  return lo + static_cast<int>(Below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

void SynthConfig::Validate() const {
  if (n_images <= 0) throw InvalidArgument("synthetic corpus needs n_images > 0");
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (num_classes < 2) throw InvalidArgument("num_classes must be at least 2");
  if (num_classes > 255) {
    throw InvalidArgument("num_classes " + std::to_string(num_classes) +
                          " is not representable in an 8-bit label map with ignore 255");
  }
  if (n_images < num_classes - 1) {
    throw InvalidArgument("cannot place all " + std::to_string(num_classes - 1) +
                          " object classes in " + std::to_string(n_images) + " images");
  }
  if (min_blobs < 1 || max_blobs < min_blobs) {
    throw InvalidArgument("blob range must satisfy 1 <= min <= max");
  }
  for (double r : noise_rates) {
    if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("noise rates must lie in [0, 1)");
  }
}

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  config.Validate();
  SynthCorpus out;
  std::vector<std::string> ids;
  for (int m = 0; m < config.n_images; ++m) {
    auto rng = Rng::Stream(config.seed, "corpus", static_cast<std::uint64_t>(m));
    const int guaranteed = 1 + m % (config.num_classes - 1);
    auto id = ImageId("img", m);
    out.ground_truth.emplace(id, PaintImage(config, rng, guaranteed));
    ids.push_back(std::move(id));
  }
  out.corpus = Corpus::FromIds(std::move(ids));
  return out;
}

std::map<std::string, LabelMap> GenerateLabeledSet(const SynthConfig& config,
                                                   std::string_view prefix,
                                                   std::string_view stream) {
  config.Validate();
  std::map<std::string, LabelMap> out;
  for (int m = 0; m < config.n_images; ++m) {
    auto rng = Rng::Stream(config.seed, stream, static_cast<std::uint64_t>(m));
    const int guaranteed = 1 + m % (config.num_classes - 1);
    out.emplace(ImageId(prefix, m), PaintImage(config, rng, guaranteed));
  }
  return out;
}

LabelMap Corrupt(const LabelMap& gt, double rate, int num_classes, std::uint64_t seed,
                 std::string_view image_id) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1)");
  if (num_classes < 2 || num_classes > 255) throw InvalidArgument("bad class count");
  LabelMap out = gt;
  if (rate == 0.0) return out;
  auto rng = Rng::Stream(seed, image_id);
  for (ClassId& v : out.mutable_pixels()) {
    if (v >= num_classes) continue;  // ignore pixels stay put
    if (rng.Uniform() >= rate) continue;
    auto replacement = static_cast<ClassId>(rng.Below(num_classes - 1));
    if (replacement >= v) ++replacement;
    v = replacement;
  }
  return out;
}

std::vector<PredictionStore> MakeModels(const SynthCorpus& corpus,
                                        const SynthConfig& config,
                                        std::span<const std::string> model_ids) {
  if (!model_ids.empty() && model_ids.size() != config.noise_rates.size()) {
    throw InvalidArgument("one model id per noise rate is required");
  }
  std::vector<PredictionStore> stores;
  for (std::size_t k = 0; k < config.noise_rates.size(); ++k) {
    const std::string id =
        model_ids.empty() ? "model_" + std::to_string(k) : model_ids[k];
    const std::uint64_t model_seed =
        Fnv1a().Update(config.seed).Update("model").Update(k).digest();
    std::map<std::string, LabelMap> preds;
    for (const auto& [image_id, gt] : corpus.ground_truth) {
      preds.emplace(image_id, Corrupt(gt, config.noise_rates[k], config.num_classes,
                                      model_seed, image_id));
    }
    stores.push_back(PredictionStore::InMemory(id, std::move(preds)));
  }
  return stores;
}

double BruteForceMetric(const LabelMap& a, const LabelMap& b, MetricKind metric,
                        const ClassCatalog& catalog) {
  if (!a.SameShape(b)) throw InvalidArgument("label map dimensions differ");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  const int ignore = catalog.ignore_id();
  std::uint64_t valid = 0;
  for (std::size_t n = 0; n < pa.size(); ++n) {
    if (pa[n] != ignore && pb[n] != ignore) ++valid;
  }
  if (valid == 0) throw InvalidArgument("no comparable pixels");

  double sum = 0.0;
  int included = 0;
  for (int y = 0; y < catalog.num_classes(); ++y) {
    std::uint64_t inter = 0, uni = 0, in_a = 0;
    for (std::size_t n = 0; n < pa.size(); ++n) {
      if (pa[n] == ignore || pb[n] == ignore) continue;
      const bool ya = pa[n] == y;
      const bool yb = pb[n] == y;
      if (ya && yb) ++inter;
      if (ya || yb) ++uni;
      if (ya) ++in_a;
    }
    switch (metric) {
      case MetricKind::kMiou:
        if (uni == 0) break;
        sum += static_cast<double>(inter) / static_cast<double>(uni);
        ++included;
        break;
      case MetricKind::kFwiou:
        if (uni == 0) break;
        sum += (static_cast<double>(in_a) / static_cast<double>(valid)) *
               (static_cast<double>(inter) / static_cast<double>(uni));
        break;
      case MetricKind::kMpa:
        if (in_a == 0) break;
        sum += static_cast<double>(inter) / static_cast<double>(in_a);
        ++included;
        break;
    }
  }
  return metric == MetricKind::kFwiou ? sum : sum / included;
}

MadSet BruteForceSelect(std::span<const PredictionStore> stores, const Corpus& corpus,
                        const ScaleStats& stats, const ClassCatalog& catalog,
                        const SelectionOptions& options) {
  if (stores.size() < 2) throw InvalidArgument("need at least two models");
  if (options.k < 1) throw InvalidArgument("K must be at least 1");
  const int ignore = catalog.ignore_id();
  auto proportion = [&](const LabelMap& map, int y) {
    std::uint64_t hits = 0, valid = 0;
    for (ClassId v : map.pixels()) {
      if (v == ignore) continue;
      ++valid;
      if (v == y) ++hits;
    }
    return valid == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(valid);
  };

  MadSet mad;
  for (std::size_t i = 0; i < stores.size(); ++i) {
    for (std::size_t j = 0; j < stores.size(); ++j) {
      if (i == j) continue;
      for (int y = 1; y < catalog.num_classes(); ++y) {
        std::vector<std::pair<double, std::string>> candidates;
        for (const auto& ref : corpus.images()) {
          const auto defender = stores[i].Load(ref.image_id);
          const auto attacker = stores[j].Load(ref.image_id);
          const auto px = defender->pixels();
          if (std::find(px.begin(), px.end(), static_cast<ClassId>(y)) == px.end()) {
            continue;
          }
          const auto bounds = stats.Get(y);
          if (bounds) {
            auto inside = [&](double p) { return p >= bounds->t_min && p <= bounds->t_max; };
            const bool check_defender = options.scale_source != ScaleSource::kAttacker;
            const bool check_attacker = options.scale_source != ScaleSource::kDefender;
            if (check_defender && !inside(proportion(*defender, y))) continue;
            if (check_attacker && !inside(proportion(*attacker, y))) continue;
          }
          candidates.emplace_back(
              Concordance(*defender, *attacker, options.metric, catalog), ref.image_id);
        }
        std::sort(candidates.begin(), candidates.end());
        for (std::size_t r = 0;
             r < candidates.size() && r < static_cast<std::size_t>(options.k); ++r) {
          mad.Add(SelectionRecord{candidates[r].second, stores[i].model_id(),
                                  stores[j].model_id(), y, candidates[r].first,
                                  options.metric, static_cast<int>(r + 1)});
        }
      }
    }
  }
  return mad;
}

ChoiceOracle ChoiceOracle::TruthMetric(const std::map<std::string, LabelMap>* truth,
                                       std::span<const PredictionStore> stores,
                                       const ClassCatalog* catalog, MetricKind metric) {
  ChoiceOracle o;
  o.policy_ = Policy::kTruthMetric;
  o.truth_ = truth;
  o.stores_.assign(stores.begin(), stores.end());
  o.catalog_ = catalog;
  o.metric_ = metric;
  return o;
}

ChoiceOracle ChoiceOracle::FixedWinner(std::string winner) {
  ChoiceOracle o;
  o.policy_ = Policy::kFixedWinner;
  o.winner_ = std::move(winner);
  return o;
}

ChoiceOracle ChoiceOracle::Noisy(ChoiceOracle truth, double flip, std::uint64_t seed) {
  if (truth.policy_ != Policy::kTruthMetric) {
    throw InvalidArgument("the noisy oracle wraps a truth-metric oracle");
  }
  if (!(flip >= 0.0 && flip <= 1.0)) throw InvalidArgument("flip probability outside [0,1]");
  truth.policy_ = Policy::kNoisy;
  truth.flip_ = flip;
  truth.seed_ = seed;
  return truth;
}

std::string ChoiceOracle::Choose(const SelectionRecord& record,
                                 std::string_view trial_id) const {
  if (policy_ == Policy::kFixedWinner) {
    if (record.attacker == winner_) return record.attacker;
    return record.defender;
  }
  auto score = [&](const std::string& model) {
    for (const auto& s : stores_) {
      if (s.model_id() == model) {
        return Concordance(*s.Load(record.image_id), truth_->at(record.image_id),
                           metric_, *catalog_);
      }
    }
    throw NotFound("oracle has no predictions for model '" + model + "'");
  };
  std::string choice = score(record.attacker) > score(record.defender) ? record.attacker
                                                                        : record.defender;
  if (policy_ == Policy::kNoisy) {
    auto rng = Rng::Stream(seed_, trial_id);
    if (rng.Uniform() < flip_) {
      choice = choice == record.defender ? record.attacker : record.defender;
    }
  }
  return choice;
}

}  // namespace madseg::synth
