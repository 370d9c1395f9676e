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

#include <sys/wait.h>

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "json.hpp"
#include "madseg/app.h"
#include "madseg/error.h"
#include "madseg/text.h"
#include "test_util.h"

namespace madseg::app {
namespace {

using madseg::testing::TempDir;

SynthOptions Workspace(const fs::path& dir, std::uint64_t seed) {
  SynthOptions o;
  o.out_dir = dir;
  o.config.seed = seed;
  o.config.n_images = 80;
  o.config.width = 32;
  o.config.height = 32;
  o.config.num_classes = 4;
  o.config.noise_rates = {0.05, 0.2, 0.35, 0.5};
  return o;
}

struct Outcome {
  int exit_code;
  std::string out;
  std::string err;
};

// Runs the installed binary with the given argument string.
Outcome RunCli(const TempDir& dir, const std::string& args) {
  const char* bin = std::getenv("MADSEG_BIN");
  if (bin == nullptr) bin = "madseg";
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(bin) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ReadFile(out), ReadFile(err)};
}

std::map<std::string, std::string> ReadTree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = ReadFile(e.path());
  }
  return files;
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    std::ostringstream log;
    CmdSynth(Workspace(dir_->path(), 7), log);
    CmdStats({*dir_ / "manifest.json", *dir_ / "stats.csv"}, log);
    SelectOptions sel{*dir_ / "manifest.json", *dir_ / "stats.csv", *dir_ / "sel", {}};
    CmdSelect(sel, log);
    RankOptions rank;
    rank.manifest = *dir_ / "manifest.json";
    rank.madset = *dir_ / "sel" / "madset.jsonl";
    rank.out_dir = *dir_ / "state";
    result_ = new RankResult(CmdRank(rank, log));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete dir_;
  }

  static TempDir* dir_;
  static RankResult* result_;
};

TempDir* PipelineTest::dir_ = nullptr;
RankResult* PipelineTest::result_ = nullptr;

TEST_F(PipelineTest, RecoversNoiseOrder) {
  const std::vector<std::string> expected = {"model_0", "model_1", "model_2", "model_3"};
  EXPECT_EQ(result_->aggressiveness.Order(), expected);
  EXPECT_EQ(result_->resistance.Order(), expected);
  EXPECT_EQ(result_->outcomes.overall.total(),
            static_cast<int>(MadSet::FromJsonLines(ReadFile(*dir_ / "sel/madset.jsonl"))
                                 .records()
                                 .size()));
}

TEST_F(PipelineTest, WritesStateWithProvenance) {
  for (const std::string f : {"A.csv", "R.csv", "ranking.json", "outcomes.json",
                              "subsets.json", "madset.jsonl"}) {
    EXPECT_TRUE(fs::exists(*dir_ / "state" / f)) << f;
  }
  const auto a = ReadFile(*dir_ / "state/A.csv");
  EXPECT_EQ(a.rfind("# madseg rank\n", 0), 0u);
  EXPECT_NE(a.find("# input manifest manifest.json fnv1a="), std::string::npos);
  EXPECT_EQ(PairMatrix::FromCsv(a, MatrixKind::kAggressiveness),
            result_->matrices.aggressiveness);

  const auto ranking = nlohmann::json::parse(ReadFile(*dir_ / "state/ranking.json"));
  EXPECT_EQ(ranking["provenance"]["command"], "rank");
  EXPECT_TRUE(ranking["provenance"].contains("generated_at"));
  EXPECT_EQ(ranking["aggressiveness"]["models"][0]["id"], "model_0");

  const auto first_line = Split(ReadFile(*dir_ / "sel/madset.jsonl"), '\n')[0];
  EXPECT_EQ(nlohmann::json::parse(first_line)["provenance"]["command"], "select");
  const auto worklist = Split(Trim(ReadFile(*dir_ / "sel/worklist.txt")), '\n');
  EXPECT_EQ(std::set<std::string>(worklist.begin(), worklist.end()),
            MadSet::FromJsonLines(ReadFile(*dir_ / "sel/madset.jsonl")).images());
}

TEST_F(PipelineTest, ParallelSelectionIsByteIdentical) {
  std::ostringstream log;
  SelectOptions sel{*dir_ / "manifest.json", *dir_ / "stats.csv", *dir_ / "sel_par", {}};
  sel.selection.jobs = 3;
  CmdSelect(sel, log);
  EXPECT_EQ(ReadFile(*dir_ / "sel_par/madset.jsonl"), ReadFile(*dir_ / "sel/madset.jsonl"));
}

TEST_F(PipelineTest, DuplicateOfBestTiesAtTheTop) {
  std::ostringstream log;
  WriteFile(*dir_ / "twin.json",
            R"({"models": [{"model_id": "twin", "prediction_dir": "preds/model_0"}]})");
  AddModelOptions o;
  o.manifest = *dir_ / "manifest.json";
  o.delta = *dir_ / "twin.json";
  o.stats = *dir_ / "stats.csv";
  o.state_dir = *dir_ / "state";
  o.out_dir = *dir_ / "state_twin";
  const auto res = CmdAddModel(o, log);
  ASSERT_TRUE(res.pending.empty());
  ASSERT_TRUE(res.expanded.has_value());
  const auto& A = res.expanded->matrices.aggressiveness;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(A.at(i, j), result_->matrices.aggressiveness.at(i, j));
    }
  }
  EXPECT_EQ(A.at(0, 4), 1.0);
  EXPECT_EQ(A.at(4, 0), 1.0);
  for (const auto* r : {&res.expanded->aggressiveness_ranking,
                        &res.expanded->resistance_ranking}) {
    const auto order = r->Order();
    EXPECT_EQ(std::set<std::string>(order.begin(), order.begin() + 2),
              (std::set<std::string>{"model_0", "twin"}));
    EXPECT_NEAR(r->mu[0], r->mu[4], 1e-6);
  }
  EXPECT_TRUE(fs::exists(*dir_ / "state_twin/ranking.json"));
  EXPECT_TRUE(fs::exists(*dir_ / "state_twin/delta.jsonl"));

  o.out_dir = o.state_dir;
  EXPECT_THROW(CmdAddModel(o, log), InvalidArgument);
}

TEST_F(PipelineTest, SrccThroughTheBinary) {
  TempDir scratch;
  const auto ranking = (*dir_ / "state/ranking.json").string();
  auto r = RunCli(scratch, "srcc " + ranking + " " + ranking);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Trim(r.out), "1");
  r = RunCli(scratch, "srcc " + ranking + " " + ranking + " --which resistance");
  EXPECT_EQ(Trim(r.out), "1");
  EXPECT_DOUBLE_EQ(CmdSrcc(*dir_ / "state/ranking.json", *dir_ / "state/ranking.json",
                           "aggressiveness"),
                   1.0);
}

TEST_F(PipelineTest, ConfigFileSitsBetweenFlagsAndDefaults) {
  TempDir scratch;
  const auto manifest = (*dir_ / "manifest.json").string();
  const auto stats = (*dir_ / "stats.csv").string();
  WriteFile(scratch / "run.ini", "k = 2\nmetric = fwiou\n");
  const auto cfg = (scratch / "run.ini").string();
  auto max_rank = [](const MadSet& mad) {
    int m = 0;
    for (const auto& r : mad.records()) m = std::max(m, r.rank_in_group);
    return m;
  };

  auto r = RunCli(scratch, "--config " + cfg + " select --manifest " + manifest + " --stats " +
                               stats + " --out " + (scratch / "c").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto mad = MadSet::FromJsonLines(ReadFile(scratch / "c/madset.jsonl"));
  EXPECT_EQ(max_rank(mad), 2);
  EXPECT_EQ(mad.records()[0].metric, MetricKind::kFwiou);

  r = RunCli(scratch, "--config " + cfg + " --k 1 select --manifest " + manifest +
                          " --stats " + stats + " --out " + (scratch / "f").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  mad = MadSet::FromJsonLines(ReadFile(scratch / "f/madset.jsonl"));
  EXPECT_EQ(max_rank(mad), 1);
  EXPECT_EQ(mad.records()[0].metric, MetricKind::kFwiou);

  r = RunCli(scratch, "select --manifest " + manifest + " --stats " + stats + " --out " +
                          (scratch / "d").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  mad = MadSet::FromJsonLines(ReadFile(scratch / "d/madset.jsonl"));
  EXPECT_EQ(max_rank(mad), 1);
  EXPECT_EQ(mad.records()[0].metric, MetricKind::kMiou);
}

TEST(CliTest, SynthIsDeterministicPerSeed) {
  TempDir a, b, c;
  std::ostringstream log;
  CmdSynth(Workspace(a.path(), 7), log);
  CmdSynth(Workspace(b.path(), 7), log);
  CmdSynth(Workspace(c.path(), 8), log);
  const auto ta = ReadTree(a.path());
  EXPECT_EQ(ta, ReadTree(b.path()));
  EXPECT_NE(ta.at("truth/img_00000.png"), ReadTree(c.path()).at("truth/img_00000.png"));
  EXPECT_TRUE(ta.count("images/img_00079.png"));
  EXPECT_TRUE(ta.count("preds/model_3/img_00079.png"));
}

TEST(CliTest, ErrorsExitWithStatusOne) {
  TempDir scratch;
  auto r = RunCli(scratch, "stats --manifest " + (scratch / "nope.json").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("madseg: ", 0), 0u) << r.err;

  std::ostringstream log;
  CmdSynth(Workspace(scratch.path(), 1), log);
  const auto manifest = (scratch / "manifest.json").string();
  r = RunCli(scratch, "add-model --manifest " + manifest + " --delta " + manifest +
                          " --stats x.csv --state " + (scratch / "missing").string() +
                          " --out " + (scratch / "o").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("missing prior state"), std::string::npos) << r.err;

  r = RunCli(scratch, "--metric dice stats --manifest " + manifest);
  EXPECT_NE(r.exit_code, 0);
  r = RunCli(scratch, "");
  EXPECT_NE(r.exit_code, 0);
}

TEST(CliTest, MissingPredictionIsNamed) {
  TempDir scratch;
  std::ostringstream log;
  CmdSynth(Workspace(scratch.path(), 2), log);
  CmdStats({scratch / "manifest.json", scratch / "stats.csv"}, log);
  fs::remove(scratch / "preds/model_2/img_00004.png");
  try {
    CmdSelect({scratch / "manifest.json", scratch / "stats.csv", scratch / "sel", {}}, log);
    FAIL();
  } catch (const NotFound& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("model_2"), std::string::npos) << what;
    EXPECT_NE(what.find("img_00004"), std::string::npos) << what;
  }
}

TEST(ManifestTest, ResolvesRelativePathsAndRejectsDuplicates) {
  TempDir scratch;
  fs::create_directories(scratch / "imgs");
  fs::create_directories(scratch / "p");
  WriteFile(scratch / "imgs/b.png", "");
  WriteFile(scratch / "imgs/a.png", "");
  const std::string base = R"({"corpus_root": "imgs", "classes": ["background", "x"],
    "models": [{"model_id": "m", "prediction_dir": "p"}, {"model_id": "n", "prediction_dir": "p"}]})";
  const auto m = Manifest::Parse(base, scratch.path());
  EXPECT_EQ(m.corpus_root, scratch / "imgs");
  EXPECT_EQ(m.image_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.model_ids(), (std::vector<std::string>{"m", "n"}));
  EXPECT_THROW(Manifest::Parse(R"({"corpus_root": "imgs", "classes": ["background", "x"],
    "models": [{"model_id": "m", "prediction_dir": "p"}, {"model_id": "m", "prediction_dir": "p"}]})",
                               scratch.path()),
               InvalidArgument);
  EXPECT_THROW(Manifest::Parse(R"({"corpus_root": "none", "classes": ["background", "x"],
    "models": []})",
                               scratch.path()),
               NotFound);
}

}  // namespace
}  // namespace madseg::app
