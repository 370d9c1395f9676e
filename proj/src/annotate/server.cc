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

#include <fstream>
#include <sstream>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "madseg/annotate.h"
#include "madseg/ranking_json.h"

namespace madseg::annotate {
namespace {

using Json = nlohmann::ordered_json;

void SendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, std::string_view error,
               std::string_view detail, Json extra = Json::object()) {
  Json body;
  body["error"] = std::string(error);
  body["detail"] = std::string(detail);
  for (auto& [k, v] : extra.items()) body[k] = v;
  SendJson(res, status, body);
}

bool SendFile(httplib::Response& res, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.empty() || !std::filesystem::is_regular_file(path, ec)) return false;
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  res.status = 200;
  res.set_content(buf.str(), "image/png");
  return true;
}

Json TrialPayload(const Trial& t, std::size_t index, std::size_t total) {
  Json j;
  j["status"] = "pending";
  j["trial_id"] = t.trial_id;
  j["index"] = index;
  j["total"] = total;
  j["image_id"] = t.image_id;
  j["category"] = t.category;
  Json assets;
  assets["image"] = "/assets/image/" + t.image_id;
  assets["left"] = "/assets/pred/left/" + t.trial_id;
  assets["right"] = "/assets/pred/right/" + t.trial_id;
  j["assets"] = std::move(assets);
  return j;
}

std::size_t TrialIndex(const Session& session, const Trial& trial) {
  return static_cast<std::size_t>(&trial - session.trials().data());
}

}  // namespace

struct AnnotationServer::Impl {
  Session& session;
  AssetResolver assets;
  std::vector<std::string> model_ids;
  RankingConfig config;
  httplib::Server server;
  bool bound = false;

  Impl(Session& s, AssetResolver a, std::vector<std::string> ids, RankingConfig c)
      : session(s), assets(std::move(a)), model_ids(std::move(ids)), config(c) {}

  void Install(const std::optional<std::filesystem::path>& static_dir);
  Json Export() const;
};

Json AnnotationServer::Impl::Export() const {
  const auto records = session.Records();
  const ExportResult result =
      ExportChoices(session.trials(), records, model_ids, config);
  Json j;
  auto log = Json::array();
  for (const auto& r : records) log.push_back(Json::parse(SerializeChoice(r)));
  j["choices"] = std::move(log);
  j["aggressiveness"] = MatrixToJson(result.matrices.aggressiveness);
  j["resistance"] = MatrixToJson(result.matrices.resistance);
  j["warnings"] = result.matrices.warnings;
  try {
    j["aggressiveness_ranking"] = RankingToJson(MleRank(result.matrices.aggressiveness, config));
    j["resistance_ranking"] = RankingToJson(MleRank(result.matrices.resistance, config));
  } catch (const ConvergenceError& e) {
    j["ranking_error"] = e.what();
  }
  return j;
}

void AnnotationServer::Impl::Install(
    const std::optional<std::filesystem::path>& static_dir) {
  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const NotFound& e) {
          SendError(res, 404, "not_found", e.what());
        } catch (const Conflict& e) {
          SendError(res, 409, "conflict", e.what());
        } catch (const InvalidArgument& e) {
          SendError(res, 400, "invalid_argument", e.what());
        } catch (const std::exception& e) {
          SendError(res, 500, "internal", e.what());
        }
      });

  server.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
    const Progress p = session.GetProgress();
    Json j;
    j["total_trials"] = p.total_trials;
    j["total_choices"] = p.total_choices;
    j["raters"] = p.done_by_rater;
    SendJson(res, 200, j);
  });

  server.Get("/api/trial/next", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string rater = req.get_param_value("rater");
    if (rater.empty()) {
      SendError(res, 400, "invalid_argument", "query parameter 'rater' is required");
      return;
    }
    const auto next = session.NextTrial(rater);
    if (!next) {
      Json j;
      j["status"] = "done";
      j["total"] = session.trials().size();
      SendJson(res, 200, j);
      return;
    }
    const Trial& t = session.GetTrial(next->trial_id);
    SendJson(res, 200, TrialPayload(t, TrialIndex(session, t), session.trials().size()));
  });

  server.Get(R"(/api/trial/([^/]+))", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    const Trial& t = session.GetTrial(req.matches[1].str());
    SendJson(res, 200, TrialPayload(t, TrialIndex(session, t), session.trials().size()));
  });

  server.Get(R"(/assets/image/([^/]+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    const std::string image_id = req.matches[1].str();
    bool known = false;
    for (const auto& t : session.trials()) {
      if (t.image_id == image_id) {
        known = true;
        break;
      }
    }
    if (!known) throw NotFound("image '" + image_id + "' is not in this session");
    if (!assets.image || !SendFile(res, assets.image(image_id))) {
      throw NotFound("image file for '" + image_id + "' is unavailable");
    }
  });

  server.Get(R"(/assets/pred/([^/]+)/([^/]+))", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
    const Side side = ParseSide(req.matches[1].str());
    const Trial& t = session.GetTrial(req.matches[2].str());
    if (!assets.prediction || !SendFile(res, assets.prediction(t.ModelOn(side), t.image_id))) {
      throw NotFound("prediction for " + std::string(SideName(side)) + " side of trial '" +
                     t.trial_id + "' is unavailable");
    }
  });

  server.Post("/api/choice", [this](const httplib::Request& req, httplib::Response& res) {
    std::string trial_id, side_name, rater;
    try {
      const auto body = nlohmann::json::parse(req.body);
      trial_id = body.at("trial_id").get<std::string>();
      side_name = body.at("side").get<std::string>();
      rater = body.at("rater").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      SendError(res, 400, "invalid_argument",
                std::string("body must be {trial_id, side, rater}: ") + e.what());
      return;
    }
    const Side side = ParseSide(side_name);
    try {
      const SubmitResult r = session.Submit(trial_id, side, rater);
      Json j;
      j["status"] = r.duplicate ? "duplicate" : "recorded";
      j["trial_id"] = trial_id;
      j["side"] = std::string(SideName(side));
      j["rater_done"] = r.rater_done;
      j["total_trials"] = r.total_trials;
      SendJson(res, 200, j);
    } catch (const Conflict& e) {
      Json extra;
      const auto current = session.ChoiceOf(trial_id, rater);
      if (current) extra["current_side"] = std::string(SideName(*current));
      SendError(res, 409, "conflict", e.what(), std::move(extra));
    }
  });

  server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    if (session.GetProgress().total_choices == 0) {
      SendError(res, 409, "empty_log", "no choices have been recorded yet");
      return;
    }
    SendJson(res, 200, Export());
  });

  if (static_dir) {
    if (!server.set_mount_point("/", static_dir->string())) {
      throw IoError("static directory " + static_dir->string() + " is not readable");
    }
  }
}

AnnotationServer::AnnotationServer(Session& session, AssetResolver assets,
                                   std::vector<std::string> model_ids,
                                   RankingConfig config,
                                   std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(session, std::move(assets), std::move(model_ids),
                                   config)) {
  config.Validate();
  impl_->Install(static_dir);
}

AnnotationServer::~AnnotationServer() { Stop(); }

int AnnotationServer::Bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
    if (bound_port < 0) throw IoError("cannot bind " + host + " to a free port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port) +
                  " (port busy or not permitted)");
  }
  impl_->bound = true;
  return bound_port;
}

void AnnotationServer::Run() {
  if (!impl_->bound) throw InvalidArgument("AnnotationServer::Run called before Bind");
  impl_->server.listen_after_bind();
}

void AnnotationServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace madseg::annotate
