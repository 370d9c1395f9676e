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

#include "madseg/ranking_json.h"

#include <string>

namespace madseg {

nlohmann::ordered_json RankingToJson(const RankingVector& ranking) {
  nlohmann::ordered_json j;
  j["gauge"] = std::string(GaugeName(ranking.gauge));
  const auto ranks = ranking.Ranks();
  auto models = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ranking.model_ids.size(); ++i) {
    nlohmann::ordered_json m;
    m["id"] = ranking.model_ids[i];
    m["mu"] = ranking.mu[i];
    m["rank"] = ranks[i];
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  j["log_likelihood"] = ranking.log_likelihood;
  return j;
}

RankingVector RankingFromJson(const nlohmann::json& j) {
  try {
    RankingVector r;
    r.gauge = ParseGauge(j.at("gauge").get<std::string>());
    for (const auto& m : j.at("models")) {
      r.model_ids.push_back(m.at("id").get<std::string>());
      r.mu.push_back(m.at("mu").get<double>());
    }
    r.log_likelihood = j.at("log_likelihood").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed ranking JSON: ") + e.what());
  }
}

nlohmann::ordered_json MatrixToJson(const PairMatrix& matrix) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(MatrixKindName(matrix.kind));
  j["models"] = matrix.model_ids;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < matrix.size(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < matrix.size(); ++k) row.push_back(matrix.at(i, k));
    rows.push_back(std::move(row));
  }
  j["values"] = std::move(rows);
  return j;
}

nlohmann::ordered_json SummaryToJson(const Summary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["min"] = s.min;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["q3"] = s.q3;
  j["max"] = s.max;
  return j;
}

}  // namespace madseg
