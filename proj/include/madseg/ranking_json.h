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

#ifndef MADSEG_RANKING_JSON_H_
#define MADSEG_RANKING_JSON_H_

#include "json.hpp"
#include "madseg/ranking.h"

namespace madseg {

// {"gauge", "models": [{"id", "mu", "rank"}], "log_likelihood"}
nlohmann::ordered_json RankingToJson(const RankingVector& ranking);
RankingVector RankingFromJson(const nlohmann::json& j);

// {"kind", "models": [...], "values": [[...], ...]}
nlohmann::ordered_json MatrixToJson(const PairMatrix& matrix);

nlohmann::ordered_json SummaryToJson(const Summary& summary);

}  // namespace madseg

#endif  // MADSEG_RANKING_JSON_H_
