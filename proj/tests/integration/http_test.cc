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

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "madseg/annotate.h"
#include "madseg/app.h"
#include "madseg/text.h"
#include "test_util.h"

namespace madseg::annotate {
namespace {

using madseg::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

// A synthetic workspace with a selected MAD set.
class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ostringstream log;
    app::SynthOptions synth;
    synth.out_dir = dir_.path();
    synth.config.n_images = 24;
    synth.config.width = 16;
    synth.config.height = 16;
    synth.config.num_classes = 3;
    synth.config.noise_rates = {0.1, 0.4, 0.6};
    app::CmdSynth(synth, log);
    app::CmdStats({dir_ / "manifest.json", dir_ / "stats.csv"}, log);
    mad_ = app::CmdSelect({dir_ / "manifest.json", dir_ / "stats.csv", dir_.path(), {}}, log);
    manifest_ = app::Manifest::Load(dir_ / "manifest.json");
  }

  void Start() {
    session_ = std::make_unique<Session>(mad_, SessionOptions{.seed = 3, .repeats = 1},
                                         dir_ / "choices.jsonl");
    AssetResolver assets;
    assets.image = [this](const std::string& id) {
      return manifest_.corpus_root / (id + ".png");
    };
    assets.prediction = [this](const std::string& model, const std::string& id) {
      for (const auto& m : manifest_.models) {
        if (m.model_id == model) return m.prediction_dir / (id + ".png");
      }
      return fs::path();
    };
    server_ = std::make_unique<AnnotationServer>(*session_, assets, manifest_.model_ids(),
                                                 RankingConfig{});
    port_ = server_->Bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->Run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 100 && !client_->Get("/api/session"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  void Stop() {
    server_->Stop();
    thread_.join();
    client_.reset();
    server_.reset();
    session_.reset();
  }

  void TearDown() override {
    if (server_) Stop();
  }

  json GetJson(const std::string& path, int expected_status = 200) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return json();
    EXPECT_EQ(res->status, expected_status) << path << " " << res->body;
    return json::parse(res->body);
  }

  json Choose(const std::string& trial, const std::string& side, const std::string& rater,
              int expected_status = 200) {
    const json body = {{"trial_id", trial}, {"side", side}, {"rater", rater}};
    auto res = client_->Post("/api/choice", body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return json();
    EXPECT_EQ(res->status, expected_status) << res->body;
    return json::parse(res->body);
  }

  TempDir dir_;
  MadSet mad_;
  app::Manifest manifest_;
  std::unique_ptr<Session> session_;
  std::unique_ptr<AnnotationServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, ScriptedSessionToExport) {
  Start();
  const int total = GetJson("/api/session")["total_trials"];
  EXPECT_EQ(total, static_cast<int>(mad_.records().size()));
  EXPECT_EQ(GetJson("/api/export", 409)["error"], "empty_log");

  int answered = 0;
  for (;;) {
    const auto next = GetJson("/api/trial/next?rater=alice");
    if (next["status"] == "done") break;
    ASSERT_EQ(next["status"], "pending");
    const std::string id = next["trial_id"];
    const auto r = Choose(id, "left", "alice");
    EXPECT_EQ(r["status"], "recorded");
    EXPECT_EQ(r["rater_done"], ++answered);
    ASSERT_LE(answered, total);
  }
  EXPECT_EQ(answered, total);
  EXPECT_EQ(GetJson("/api/session")["total_choices"], total);

  const auto exported = GetJson("/api/export");
  EXPECT_EQ(exported["choices"].size(), static_cast<std::size_t>(total));
  EXPECT_TRUE(exported.contains("aggressiveness"));
  EXPECT_TRUE(exported.contains("resistance"));
}

TEST_F(HttpTest, DuplicateConflictAndErrors) {
  Start();
  const std::string id = GetJson("/api/trial/next?rater=bob")["trial_id"];
  Choose(id, "right", "bob");
  EXPECT_EQ(Choose(id, "right", "bob")["status"], "duplicate");
  const auto conflict = Choose(id, "left", "bob", 409);
  EXPECT_EQ(conflict["current_side"], "right");
  EXPECT_EQ(Choose("t999999", "left", "bob", 404)["error"], "not_found");
  Choose(id, "up", "bob", 400);
  Choose(id, "left", "", 400);
  auto res = client_->Post("/api/choice", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  GetJson("/api/trial/t999999", 404);
  GetJson("/assets/image/not_in_session", 404);
}

TEST_F(HttpTest, PayloadsNeverNameModels) {
  Start();
  const auto trial = GetJson("/api/trial/next?rater=carol");
  const std::string dumped = trial.dump();
  for (const auto& id : manifest_.model_ids()) {
    EXPECT_EQ(dumped.find(id), std::string::npos) << dumped;
  }
  for (const std::string key : {"image", "left", "right"}) {
    const std::string url = trial["assets"][key];
    EXPECT_EQ(url.find("model_"), std::string::npos) << url;
    auto res = client_->Get(url);
    ASSERT_TRUE(res) << url;
    EXPECT_EQ(res->status, 200) << url;
    EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(res->body.substr(1, 3), "PNG");
  }
  const auto r = Choose(trial["trial_id"], "left", "carol");
  for (const auto& id : manifest_.model_ids()) {
    EXPECT_EQ(r.dump().find(id), std::string::npos);
  }
}

TEST_F(HttpTest, RestartKeepsAcknowledgedChoices) {
  Start();
  std::vector<std::pair<std::string, std::string>> acked;
  for (int i = 0; i < 5; ++i) {
    const std::string id = GetJson("/api/trial/next?rater=dave")["trial_id"];
    const std::string side = i % 2 ? "left" : "right";
    Choose(id, side, "dave");
    acked.emplace_back(id, side);
  }
  Stop();
  Start();
  EXPECT_EQ(GetJson("/api/session")["total_choices"], 5);
  for (const auto& [id, side] : acked) {
    EXPECT_EQ(Choose(id, side, "dave")["status"], "duplicate");
  }
  const auto next = GetJson("/api/trial/next?rater=dave");
  EXPECT_EQ(next["index"], 5);
}

}  // namespace
}  // namespace madseg::annotate
