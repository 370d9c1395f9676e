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

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <mutex>
#include <set>
#include <utility>

#include "json.hpp"
#include "madseg/annotate.h"
#include "madseg/hash.h"
#include "madseg/text.h"

namespace madseg::annotate {
namespace {

std::string UtcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                          now.time_since_epoch())
                          .count() %
                      1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                tm.tm_sec, static_cast<int>(millis));
  return buf;
}

std::string TrialId(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "t%06zu", index);
  return buf;
}

}  // namespace

std::string_view SideName(Side side) { return side == Side::kLeft ? "left" : "right"; }

Side ParseSide(std::string_view name) {
  if (name == "left") return Side::kLeft;
  if (name == "right") return Side::kRight;
  throw InvalidArgument("side must be 'left' or 'right', got '" + std::string(name) + "'");
}

std::string SerializeChoice(const ChoiceRecord& record) {
  nlohmann::ordered_json j;
  j["trial_id"] = record.trial_id;
  j["chosen_side"] = std::string(SideName(record.chosen_side));
  j["chosen_model"] = record.chosen_model;
  j["rater_id"] = record.rater_id;
  j["timestamp"] = record.timestamp;
  return j.dump();
}

ChoiceRecord ParseChoice(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ChoiceRecord r;
    r.trial_id = j.at("trial_id").get<std::string>();
    r.chosen_side = ParseSide(j.at("chosen_side").get<std::string>());
    r.chosen_model = j.at("chosen_model").get<std::string>();
    r.rater_id = j.at("rater_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed choice record: ") + e.what());
  }
}

std::vector<Trial> BuildTrials(const MadSet& mad, const SessionOptions& options) {
  if (options.repeats < 1) throw InvalidArgument("repeats must be at least 1");
  std::vector<Trial> trials;
  trials.reserve(mad.records().size() * options.repeats);
  for (int pass = 0; pass < options.repeats; ++pass) {
    for (const auto& r : mad.records()) {
      Trial t;
      t.trial_id = TrialId(trials.size());
      t.image_id = r.image_id;
      t.defender = r.defender;
      t.attacker = r.attacker;
      t.category = r.category;
      const bool defender_left =
          (MixSeed(options.seed ^ HashString(t.trial_id)) & 1U) == 0;
      t.left_model = defender_left ? r.defender : r.attacker;
      t.right_model = defender_left ? r.attacker : r.defender;
      trials.push_back(std::move(t));
    }
  }
  return trials;
}

Session::Session(const MadSet& mad, SessionOptions options,
                 std::filesystem::path log_path, Clock clock)
    : trials_(BuildTrials(mad, options)),
      options_(options),
      log_path_(std::move(log_path)),
      clock_(clock ? std::move(clock) : Clock(UtcNow)) {
  if (trials_.empty()) throw InvalidArgument("MAD set is empty; no trials to serve");
  for (std::size_t i = 0; i < trials_.size(); ++i) trial_index_[trials_[i].trial_id] = i;
  Replay();
  fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw IoError("cannot open choice log " + log_path_.string() + ": " +
                  std::strerror(errno));
  }
}

Session::~Session() {
  if (fd_ >= 0) ::close(fd_);
}

ReplayedLog ReplayChoiceLog(std::string_view text, std::span<const Trial> trials,
                            std::string_view source) {
  std::map<std::string_view, const Trial*> by_id;
  for (const auto& t : trials) by_id[t.trial_id] = &t;
  std::map<std::pair<std::string, std::string>, Side> seen;
  ReplayedLog out;
  std::size_t pos = 0;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    return InvalidArgument(std::string(source) + " line " + std::to_string(line_no) + ": " +
                           what);
  };
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    ++line_no;
    if (nl == std::string_view::npos) break;  // torn final write
    const auto line = Trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    out.valid_bytes = pos;
    if (line.empty()) continue;
    ChoiceRecord r;
    try {
      r = ParseChoice(line);
    } catch (const InvalidArgument& e) {
      throw fail(e.what());
    }
    auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) {
      throw fail("unknown trial '" + r.trial_id + "'; the log belongs to another MAD set or seed");
    }
    if (it->second->ModelOn(r.chosen_side) != r.chosen_model) {
      throw fail("side/model mapping disagrees with the session seed");
    }
    auto [prev, inserted] = seen.emplace(std::make_pair(r.rater_id, r.trial_id), r.chosen_side);
    if (!inserted) {
      if (prev->second != r.chosen_side) {
        throw fail("conflicting choice for trial '" + r.trial_id + "'");
      }
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

void Session::Replay() {
  if (!std::filesystem::exists(log_path_)) return;
  const std::string text = ReadFile(log_path_);
  ReplayedLog log = ReplayChoiceLog(text, trials_, log_path_.string());
  for (auto& r : log.records) {
    choices_.emplace(std::make_pair(r.rater_id, r.trial_id), r.chosen_side);
    records_.push_back(std::move(r));
  }
  if (log.valid_bytes < text.size()) std::filesystem::resize_file(log_path_, log.valid_bytes);
}

void Session::Append(const ChoiceRecord& record) {
  const std::string line = SerializeChoice(record) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("cannot append to choice log: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw IoError("cannot sync choice log: " + std::string(std::strerror(errno)));
  }
}

const Trial& Session::GetTrial(std::string_view trial_id) const {
  auto it = trial_index_.find(trial_id);
  if (it == trial_index_.end()) {
    throw NotFound("unknown trial '" + std::string(trial_id) + "'");
  }
  return trials_[it->second];
}

std::optional<Trial> Session::NextTrial(std::string_view rater_id) const {
  std::shared_lock lock(mu_);
  const std::string rater(rater_id);
  for (const auto& t : trials_) {
    if (!choices_.count({rater, t.trial_id})) return t;
  }
  return std::nullopt;
}

int Session::DoneLocked(const std::string& rater) const {
  int done = 0;
  for (auto it = choices_.lower_bound({rater, std::string()});
       it != choices_.end() && it->first.first == rater; ++it) {
    ++done;
  }
  return done;
}

SubmitResult Session::Submit(std::string_view trial_id, Side side,
                             std::string_view rater_id) {
  if (rater_id.empty()) throw InvalidArgument("rater id must not be empty");
  const Trial& trial = GetTrial(trial_id);
  std::unique_lock lock(mu_);
  const std::string rater(rater_id);
  const auto key = std::make_pair(rater, trial.trial_id);
  SubmitResult result;
  result.total_trials = static_cast<int>(trials_.size());
  if (auto it = choices_.find(key); it != choices_.end()) {
    if (it->second != side) {
      throw Conflict("rater '" + rater + "' already chose " +
                     std::string(SideName(it->second)) + " for trial '" +
                     trial.trial_id + "'");
    }
    result.duplicate = true;
    result.rater_done = DoneLocked(rater);
    return result;
  }
  ChoiceRecord record{trial.trial_id, side, trial.ModelOn(side), rater, clock_()};
  Append(record);
  choices_.emplace(key, side);
  records_.push_back(std::move(record));
  result.rater_done = DoneLocked(rater);
  return result;
}

Progress Session::GetProgress() const {
  std::shared_lock lock(mu_);
  Progress p;
  p.total_trials = static_cast<int>(trials_.size());
  p.total_choices = static_cast<int>(records_.size());
  for (const auto& [key, side] : choices_) ++p.done_by_rater[key.first];
  return p;
}

std::vector<ChoiceRecord> Session::Records() const {
  std::shared_lock lock(mu_);
  return records_;
}

std::optional<Side> Session::ChoiceOf(std::string_view trial_id,
                                      std::string_view rater_id) const {
  std::shared_lock lock(mu_);
  auto it = choices_.find({std::string(rater_id), std::string(trial_id)});
  if (it == choices_.end()) return std::nullopt;
  return it->second;
}

ExportResult ExportChoices(std::span<const Trial> trials,
                           std::span<const ChoiceRecord> records,
                           std::span<const std::string> model_ids,
                           const RankingConfig& config) {
  if (records.empty()) throw InvalidArgument("choice log is empty; nothing to export");
  std::map<std::string_view, const Trial*> by_id;
  for (const auto& t : trials) by_id[t.trial_id] = &t;
  ExportResult out;
  std::vector<PairwiseOutcome> outcomes;
  outcomes.reserve(records.size());
  for (const auto& r : records) {
    auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) throw NotFound("choice references unknown trial '" + r.trial_id + "'");
    const Trial& t = *it->second;
    if (t.ModelOn(r.chosen_side) != r.chosen_model) {
      throw InvalidArgument("choice for trial '" + r.trial_id +
                            "' names a model that is not on the chosen side");
    }
    outcomes.push_back(PairwiseOutcome{t.defender, t.attacker, r.chosen_model});
    out.log_jsonl += SerializeChoice(r);
    out.log_jsonl += '\n';
  }
  out.model_ids.assign(model_ids.begin(), model_ids.end());
  out.matrices = PairwiseFrom2afc(out.model_ids, outcomes, config);
  return out;
}

}  // namespace madseg::annotate
