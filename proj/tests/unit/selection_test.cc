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

#include "madseg/selection.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "madseg/error.h"
#include "madseg/synth.h"
#include "test_util.h"

namespace madseg {
namespace {

using testing::Map;

// 1 x n strip with `ones` pixels of `category` followed by background.
LabelMap Strip(int n, int ones, int category = 1) {
  std::vector<ClassId> px(n, 0);
  std::fill(px.begin(), px.begin() + ones, static_cast<ClassId>(category));
  return LabelMap(n, 1, std::move(px));
}

double Type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

TEST(ScaleStatsTest, QuartilesOverImagesContainingTheCategory) {
  const auto catalog = ClassCatalog::WithClassCount(3);
  // Class 1 covers 0.1..0.4 of four maps; a fifth map lacks it entirely.
  std::vector<LabelMap> maps = {Strip(10, 1), Strip(10, 2), Strip(10, 3), Strip(10, 4),
                                Strip(10, 0)};
  const auto stats = ComputeScaleStats(maps, catalog);
  const std::vector<double> sample = {0.1, 0.2, 0.3, 0.4};
  ASSERT_TRUE(stats.Get(1).has_value());
  EXPECT_NEAR(stats.Get(1)->t_min, Type7(sample, 0.25), 1e-15);
  EXPECT_NEAR(stats.Get(1)->t_max, Type7(sample, 0.75), 1e-15);
  EXPECT_NEAR(stats.Get(1)->t_min, 0.175, 1e-12);
  EXPECT_NEAR(stats.Get(1)->t_max, 0.325, 1e-12);
  EXPECT_FALSE(stats.Get(2).has_value());
  EXPECT_TRUE(stats.Admits(2, 0.99));
}

TEST(ScaleStatsTest, SingleImageGivesDegenerateBounds) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  const std::vector<LabelMap> maps = {Strip(10, 3)};
  const auto b = ComputeScaleStats(maps, catalog).Get(1);
  ASSERT_TRUE(b.has_value());
  EXPECT_DOUBLE_EQ(b->t_min, 0.3);
  EXPECT_DOUBLE_EQ(b->t_max, 0.3);
}

TEST(ScaleStatsTest, IgnoredPixelsLeaveTheDenominator) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  const std::vector<LabelMap> maps = {Map(4, 1, {1, 0, 255, 255})};
  EXPECT_DOUBLE_EQ(ComputeScaleStats(maps, catalog).Get(1)->t_min, 0.5);
  EXPECT_THROW(ComputeScaleStats(std::vector<LabelMap>{}, catalog), InvalidArgument);
}

TEST(ScaleStatsTest, CsvRoundTripSkipsComments) {
  ScaleStats stats(4);
  stats.Set(1, {0.034, 0.16});
  stats.Set(3, {0.1 / 3.0, 2.0 / 3.0});
  const std::vector<std::string> comments = {"madseg stats", "input x"};
  const std::string csv = stats.ToCsv(comments);
  EXPECT_EQ(csv.rfind("# madseg stats\n", 0), 0u);
  EXPECT_EQ(ScaleStats::FromCsv(csv, 4), stats);
  EXPECT_THROW(ScaleStats::FromCsv("category,t_min,t_max\n1,0.5,0.2\n", 4), InvalidArgument);
  EXPECT_THROW(ScaleStats::FromCsv("category,t_min,t_max\n9,0.1,0.2\n", 4), InvalidArgument);
  EXPECT_THROW(ScaleStats::FromCsv("category,t_min,t_max\n1,0.1\n", 4), InvalidArgument);
}

TEST(ScaleFilterTest, BoundsAreInclusive) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  const auto store = PredictionStore::InMemory(
      "m", {{"edge", Strip(1000, 34)}, {"big", Strip(1000, 900)}, {"top", Strip(1000, 160)}});
  ScaleStats stats(2);
  stats.Set(1, {0.034, 0.160});
  const std::vector<std::string> group = {"big", "edge", "top"};
  EXPECT_EQ(ScaleFilter(group, store, 1, stats, catalog),
            (std::vector<std::string>{"edge", "top"}));
  EXPECT_EQ(ScaleFilter(group, store, 1, ScaleStats(2), catalog), group);
}

TEST(GroupTest, MembershipByPresenceWithoutBackground) {
  const auto catalog = ClassCatalog::WithClassCount(8);
  const auto store = PredictionStore::InMemory(
      "d", {{"x", Map(3, 1, {0, 3, 7})}, {"bg", Map(3, 1, {0, 0, 0})}});
  const auto groups = GroupByDefender(store, Corpus::FromIds({"x", "bg"}), catalog);
  ASSERT_EQ(groups.size(), 8u);
  EXPECT_TRUE(groups[0].empty());
  for (int y = 1; y < 8; ++y) {
    EXPECT_EQ(groups[y], (y == 3 || y == 7) ? std::vector<std::string>{"x"}
                                            : std::vector<std::string>{});
  }
}

TEST(GroupTest, BothImagesContainingClassShareAGroup) {
  const auto catalog = ClassCatalog::WithClassCount(6);
  const auto store =
      PredictionStore::InMemory("d", {{"a", Map(2, 1, {5, 0})}, {"b", Map(2, 1, {5, 5})}});
  EXPECT_EQ(GroupByDefender(store, Corpus::FromIds({"b", "a"}), catalog)[5],
            (std::vector<std::string>{"a", "b"}));
}

TEST(TopKTest, AscendingWithIdTieBreak) {
  const std::vector<ScoredImage> scores = {{"a", 0.2}, {"b", 0.5}, {"c", 0.1}};
  auto picked = SelectTopK(scores, "d", "t", 1, MetricKind::kMiou, 2);
  ASSERT_EQ(picked.size(), 2u);
  EXPECT_EQ(picked[0].image_id, "c");
  EXPECT_EQ(picked[0].rank_in_group, 1);
  EXPECT_EQ(picked[1].image_id, "a");
  EXPECT_EQ(picked[1].rank_in_group, 2);

  const std::vector<ScoredImage> tie = {{"b", 0.3}, {"a", 0.3}};
  EXPECT_EQ(SelectTopK(tie, "d", "t", 1, MetricKind::kMiou, 1)[0].image_id, "a");

  const std::vector<ScoredImage> one = {{"z", 0.9}};
  EXPECT_EQ(SelectTopK(one, "d", "t", 1, MetricKind::kMiou, 3).size(), 1u);
  EXPECT_THROW(SelectTopK(one, "d", "t", 1, MetricKind::kMiou, 0), InvalidArgument);
}

TEST(PairwiseSelectionTest, TwoModelsOneCategoryTwoImages) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  std::vector<PredictionStore> stores = {
      PredictionStore::InMemory("f1", {{"p", Map(2, 1, {1, 0})}, {"q", Map(2, 1, {1, 1})}}),
      PredictionStore::InMemory("f2", {{"p", Map(2, 1, {0, 1})}, {"q", Map(2, 1, {1, 0})}})};
  const auto mad = RunPairwiseSelection(stores, Corpus::FromIds({"p", "q"}), ScaleStats(2),
                                        catalog, {});
  ASSERT_EQ(mad.records().size(), 2u);
  EXPECT_EQ(mad.records()[0].defender, "f1");
  EXPECT_EQ(mad.records()[1].defender, "f2");
  // Both ordered pairs pick the most discordant image; re-selection is allowed.
  EXPECT_EQ(mad.records()[0].image_id, "p");
  EXPECT_EQ(mad.records()[1].image_id, "p");
  EXPECT_EQ(mad.images().size(), 1u);
}

TEST(PairwiseSelectionTest, OverlappingGroupsSelectTheSameImageTwice) {
  const auto catalog = ClassCatalog::WithClassCount(8);
  std::vector<PredictionStore> stores = {
      PredictionStore::InMemory("f1", {{"x", Map(3, 1, {0, 3, 7})}}),
      PredictionStore::InMemory("f2", {{"x", Map(3, 1, {0, 0, 0})}})};
  const auto mad =
      RunPairwiseSelection(stores, Corpus::FromIds({"x"}), ScaleStats(8), catalog, {});
  const auto sub = mad.Subset("f1", "f2");
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0].category, 3);
  EXPECT_EQ(sub[1].category, 7);
  EXPECT_TRUE(mad.Subset("f2", "f1").empty());
}

TEST(PairwiseSelectionTest, ScaleSourceSwitch) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  // Defender has a small object, attacker a large one.
  std::vector<PredictionStore> stores = {
      PredictionStore::InMemory("small", {{"x", Strip(10, 1)}}),
      PredictionStore::InMemory("large", {{"x", Strip(10, 9)}})};
  ScaleStats stats(2);
  stats.Set(1, {0.05, 0.5});
  const Corpus corpus = Corpus::FromIds({"x"});
  auto count = [&](ScaleSource source) {
    SelectionOptions o;
    o.scale_source = source;
    return RunPairwiseSelection(stores, corpus, stats, catalog, o).Subset("small", "large").size();
  };
  EXPECT_EQ(count(ScaleSource::kDefender), 1u);
  EXPECT_EQ(count(ScaleSource::kAttacker), 0u);
  EXPECT_EQ(count(ScaleSource::kBoth), 0u);
  EXPECT_EQ(ParseScaleSource("both"), ScaleSource::kBoth);
  EXPECT_THROW(ParseScaleSource("either"), InvalidArgument);
}

TEST(PairwiseSelectionTest, MissingPredictionNamesModelAndImage) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  std::vector<PredictionStore> stores = {
      PredictionStore::InMemory("alpha", {{"i1", Strip(4, 1)}, {"i2", Strip(4, 2)}}),
      PredictionStore::InMemory("beta", {{"i1", Strip(4, 2)}})};
  try {
    RunPairwiseSelection(stores, Corpus::FromIds({"i1", "i2"}), ScaleStats(2), catalog, {});
    FAIL() << "expected NotFound";
  } catch (const NotFound& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("beta"), std::string::npos) << what;
    EXPECT_NE(what.find("i2"), std::string::npos) << what;
  }
}

TEST(PairwiseSelectionTest, RequiresTwoModels) {
  const auto catalog = ClassCatalog::WithClassCount(2);
  std::vector<PredictionStore> stores = {PredictionStore::InMemory("a", {{"x", Strip(2, 1)}})};
  EXPECT_THROW(RunPairwiseSelection(stores, Corpus::FromIds({"x"}), ScaleStats(2), catalog, {}),
               InvalidArgument);
}

TEST(MadSetTest, JsonLinesRoundTripAndProvenanceSkip) {
  MadSet mad;
  mad.Add({"img_b", "f1", "f2", 3, 0.1 / 3.0, MetricKind::kFwiou, 1});
  mad.Add({"img_a", "f2", "f1", 1, 0.25, MetricKind::kFwiou, 2});
  const std::string text = mad.ToJsonLines(R"({"provenance":{"command":"select"}})");
  EXPECT_EQ(MadSet::FromJsonLines(text), mad);
  EXPECT_EQ(MadSet::FromJsonLines(mad.ToJsonLines()).ToJsonLines(), mad.ToJsonLines());
  EXPECT_NE(text.find(R"("image_id":"img_b","defender":"f1","attacker":"f2","category":3)"),
            std::string::npos);
  EXPECT_THROW(MadSet::FromJsonLines("{\"image_id\":1}\n"), InvalidArgument);
}

TEST(MadSetTest, AnnotationBatchIsSortedAndUnique) {
  MadSet mad;
  mad.Add({"b", "f1", "f2", 1, 0.1, MetricKind::kMiou, 1});
  mad.Add({"a", "f1", "f2", 2, 0.1, MetricKind::kMiou, 1});
  mad.Add({"a", "f2", "f1", 1, 0.1, MetricKind::kMiou, 1});
  EXPECT_EQ(AssembleAnnotationBatch(mad), (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(AssembleAnnotationBatch(MadSet()), InvalidArgument);
}

TEST(CorpusTest, RejectsDuplicates) {
  EXPECT_THROW(Corpus::FromIds({"a", "a"}), InvalidArgument);
  EXPECT_THROW(Corpus::FromIds({""}), InvalidArgument);
  const auto c = Corpus::FromIds({"b", "a"});
  EXPECT_EQ(c.images()[0].image_id, "a");
  EXPECT_EQ(c.Find("b")->path, "b.png");
  EXPECT_EQ(c.Find("z"), nullptr);
}

struct Instance {
  synth::SynthCorpus corpus;
  std::vector<PredictionStore> stores;
  ScaleStats stats{6};
  ClassCatalog catalog = ClassCatalog::WithClassCount(6);
};

Instance MakeInstance(std::uint64_t seed, int n_images, int n_models) {
  synth::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_images = n_images;
  cfg.width = 24;
  cfg.height = 16;
  for (int k = 0; k < n_models; ++k) cfg.noise_rates.push_back(0.1 + 0.1 * k);
  Instance in;
  in.corpus = synth::GenerateCorpus(cfg);
  in.stores = synth::MakeModels(in.corpus, cfg);
  std::vector<LabelMap> labeled;
  for (const auto& [id, gt] : synth::GenerateLabeledSet(cfg, "train_", "train")) {
    labeled.push_back(gt);
  }
  in.stats = ComputeScaleStats(labeled, in.catalog);
  return in;
}

TEST(SelectionPropertyTest, SelectedAreNoMoreConcordantThanTheRest) {
  const auto in = MakeInstance(21, 60, 3);
  for (auto metric : {MetricKind::kMiou, MetricKind::kMpa}) {
    SelectionOptions opt;
    opt.metric = metric;
    opt.k = 2;
    const auto mad = RunPairwiseSelection(in.stores, in.corpus.corpus, in.stats, in.catalog, opt);
    EXPECT_LE(mad.records().size(), 3u * 2u * 5u * 2u);
    for (const auto& r : mad.records()) {
      const PredictionStore* def = nullptr;
      const PredictionStore* att = nullptr;
      for (const auto& s : in.stores) {
        if (s.model_id() == r.defender) def = &s;
        if (s.model_id() == r.attacker) att = &s;
      }
      const auto dmap = def->Load(r.image_id);
      const double p = ClassProportions(*dmap, in.catalog)[r.category];
      EXPECT_TRUE(in.stats.Admits(r.category, p));
      EXPECT_GT(p, 0.0);
      EXPECT_DOUBLE_EQ(r.concordance,
                       Concordance(*dmap, *att->Load(r.image_id), metric, in.catalog));
      // No unselected admissible member of the group scores lower.
      for (const auto& img : in.corpus.corpus.images()) {
        const auto m = def->Load(img.image_id);
        const double q = ClassProportions(*m, in.catalog)[r.category];
        if (q == 0.0 || !in.stats.Admits(r.category, q)) continue;
        bool selected = false;
        for (const auto& o : mad.Subset(r.defender, r.attacker)) {
          selected |= o.category == r.category && o.image_id == img.image_id;
        }
        if (selected) continue;
        EXPECT_LE(r.concordance,
                  Concordance(*m, *att->Load(img.image_id), metric, in.catalog));
      }
    }
  }
}

TEST(SelectionPropertyTest, ParallelScanIsByteIdentical) {
  const auto in = MakeInstance(4, 80, 4);
  SelectionOptions serial;
  SelectionOptions parallel;
  parallel.jobs = 4;
  for (auto metric : {MetricKind::kMiou, MetricKind::kFwiou}) {
    serial.metric = parallel.metric = metric;
    EXPECT_EQ(RunPairwiseSelection(in.stores, in.corpus.corpus, in.stats, in.catalog, serial)
                  .ToJsonLines(),
              RunPairwiseSelection(in.stores, in.corpus.corpus, in.stats, in.catalog, parallel)
                  .ToJsonLines());
  }
}

TEST(SelectionPropertyTest, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto in = MakeInstance(seed, 30 + 10 * static_cast<int>(seed), 3);
    for (int k : {1, 2}) {
      for (auto metric : {MetricKind::kMiou, MetricKind::kFwiou, MetricKind::kMpa}) {
        SelectionOptions opt;
        opt.metric = metric;
        opt.k = k;
        opt.scale_source = static_cast<ScaleSource>(seed % 3);
        EXPECT_EQ(
            RunPairwiseSelection(in.stores, in.corpus.corpus, in.stats, in.catalog, opt)
                .ToJsonLines(),
            synth::BruteForceSelect(in.stores, in.corpus.corpus, in.stats, in.catalog, opt)
                .ToJsonLines())
            << "seed " << seed << " k " << k << " " << MetricName(metric);
      }
    }
  }
}

TEST(SelectPairsTest, SubsetOfPairsKeepsListedOrder) {
  const auto in = MakeInstance(3, 40, 3);
  const std::vector<ModelPair> pairs = {{2, 0}, {0, 2}};
  const auto mad = SelectPairs(in.stores, in.corpus.corpus, in.stats, in.catalog, {}, pairs);
  ASSERT_FALSE(mad.empty());
  EXPECT_EQ(mad.records().front().defender, "model_2");
  EXPECT_EQ(mad.records().back().defender, "model_0");
  EXPECT_EQ(AllOrderedPairs(3).size(), 6u);
}

}  // namespace
}  // namespace madseg
