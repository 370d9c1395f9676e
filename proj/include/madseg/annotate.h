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

#ifndef MADSEG_ANNOTATE_H_
#define MADSEG_ANNOTATE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "madseg/ranking.h"
#include "madseg/selection.h"

namespace madseg::annotate {

enum class Side { kLeft, kRight };

std::string_view SideName(Side side);  // "left" / "right"
Side ParseSide(std::string_view name);

// One forced-choice comparison between the two models of a MAD record.
struct Trial {
  std::string trial_id;
  std::string image_id;
  std::string defender;
  std::string attacker;
  int category = 0;
  std::string left_model;
  std::string right_model;

  const std::string& ModelOn(Side side) const {
    return side == Side::kLeft ? left_model : right_model;
  }
};

struct ChoiceRecord {
  std::string trial_id;
  Side chosen_side = Side::kLeft;
  std::string chosen_model;
  std::string rater_id;
  std::string timestamp;

  friend bool operator==(const ChoiceRecord&, const ChoiceRecord&) = default;
};

// JSON Lines codec for the append-only choice log.
std::string SerializeChoice(const ChoiceRecord& record);
ChoiceRecord ParseChoice(std::string_view line);

struct SessionOptions {
  std::uint64_t seed = 0;
  int repeats = 1;  // trials per MAD record per rater
};

// Trials "t000000", "t000001", ... in record order, `repeats` passes over the
// records. The defender sits on the left iff a hash of (seed, trial id) is
// even, so the assignment can be re-derived from the seed alone.
std::vector<Trial> BuildTrials(const MadSet& mad, const SessionOptions& options);

struct ReplayedLog {
  std::vector<ChoiceRecord> records;  // exact duplicates collapsed
  std::size_t valid_bytes = 0;        // prefix ending at the last newline
};

// Parses a choice log against the trial list. A final line without a
// newline is a torn write and is ignored. Unknown trials, side/model
// mismatches and conflicting duplicates throw InvalidArgument naming
// `source` and the line number.
ReplayedLog ReplayChoiceLog(std::string_view text, std::span<const Trial> trials,
                            std::string_view source);

struct Progress {
  int total_trials = 0;
  int total_choices = 0;
  std::map<std::string, int> done_by_rater;
};

struct SubmitResult {
  bool duplicate = false;
  int rater_done = 0;
  int total_trials = 0;
};

// Thread-safe 2AFC session state backed by a JSON Lines log. Every accepted
// choice is appended and fsync'ed before Submit returns.
class Session {
 public:
  using Clock = std::function<std::string()>;

  // Replays the log when it exists. A torn final line (no trailing newline)
  // is dropped; any other malformed or inconsistent line throws
  // InvalidArgument.
  Session(const MadSet& mad, SessionOptions options, std::filesystem::path log_path,
          Clock clock = {});
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::vector<Trial>& trials() const { return trials_; }
  const SessionOptions& options() const { return options_; }
  const std::filesystem::path& log_path() const { return log_path_; }

  // Throws NotFound.
  const Trial& GetTrial(std::string_view trial_id) const;

  // Lowest-ordered trial the rater has not answered; nullopt when done.
  std::optional<Trial> NextTrial(std::string_view rater_id) const;

  // Throws NotFound for an unknown trial, Conflict when the rater already
  // chose the other side, InvalidArgument for an empty rater id.
  SubmitResult Submit(std::string_view trial_id, Side side, std::string_view rater_id);

  Progress GetProgress() const;
  std::vector<ChoiceRecord> Records() const;

  // The side this rater picked for the trial, if any.
  std::optional<Side> ChoiceOf(std::string_view trial_id, std::string_view rater_id) const;

 private:
  void Replay();
  void Append(const ChoiceRecord& record);
  int DoneLocked(const std::string& rater) const;

  std::vector<Trial> trials_;
  std::map<std::string, std::size_t, std::less<>> trial_index_;
  SessionOptions options_;
  std::filesystem::path log_path_;
  Clock clock_;
  int fd_ = -1;

  mutable std::shared_mutex mu_;
  std::vector<ChoiceRecord> records_;
  // (rater, trial) -> side
  std::map<std::pair<std::string, std::string>, Side> choices_;
};

struct ExportResult {
  std::string log_jsonl;
  CompetitionMatrices matrices;
  std::vector<std::string> model_ids;
};

// Pure function of the log: resolves each record against its trial and
// builds win-ratio matrices. Throws InvalidArgument on an empty log.
ExportResult ExportChoices(std::span<const Trial> trials,
                           std::span<const ChoiceRecord> records,
                           std::span<const std::string> model_ids,
                           const RankingConfig& config);

// Where the service finds the files it streams to raters.
struct AssetResolver {
  std::function<std::filesystem::path(const std::string& image_id)> image;
  std::function<std::filesystem::path(const std::string& model_id,
                                      const std::string& image_id)>
      prediction;
};

// HTTP front end for a Session.
//   GET  /api/session                  progress summary
//   GET  /api/trial/next?rater=ID      next trial payload or {"status":"done"}
//   GET  /api/trial/{trial_id}         trial payload
//   GET  /assets/image/{image_id}      corpus image
//   GET  /assets/pred/{side}/{trial}   prediction shown on that side
//   POST /api/choice                   {"trial_id", "side", "rater"}
//   GET  /api/export                   log, matrices and rankings
// Trial payloads never carry model ids. Errors are {"error", "detail"}.
class AnnotationServer {
 public:
  AnnotationServer(Session& session, AssetResolver assets,
                   std::vector<std::string> model_ids, RankingConfig config,
                   std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port. Throws IoError
  // when the port is unavailable.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Requires a prior Bind.
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace madseg::annotate

#endif  // MADSEG_ANNOTATE_H_
