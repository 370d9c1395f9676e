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

#include "json.hpp"

#include <string>
#include <utility>

#include "madseg/error.h"
#include "madseg/selection.h"
#include "madseg/text.h"

namespace madseg {

using nlohmann::json;

MadSet::MadSet(std::vector<SelectionRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) Add(std::move(r));
}

void MadSet::Add(SelectionRecord record) {
  images_.insert(record.image_id);
  records_.push_back(std::move(record));
}

void MadSet::Append(const MadSet& other) {
  for (const auto& r : other.records_) Add(r);
}

std::vector<SelectionRecord> MadSet::Subset(std::string_view defender,
                                            std::string_view attacker) const {
  std::vector<SelectionRecord> out;
  for (const auto& r : records_) {
    if (r.defender == defender && r.attacker == attacker) out.push_back(r);
  }
  return out;
}

std::string MadSet::ToJsonLines(std::string_view header_line) const {
  std::string out;
  if (!header_line.empty()) {
    out += header_line;
    out += '\n';
  }
  for (const auto& r : records_) {
    // ordered_json keeps the documented field order in the output.
    nlohmann::ordered_json j;
    j["image_id"] = r.image_id;
    j["defender"] = r.defender;
    j["attacker"] = r.attacker;
    j["category"] = r.category;
    j["concordance"] = r.concordance;
    j["metric"] = std::string(MetricName(r.metric));
    j["rank_in_group"] = r.rank_in_group;
    out += j.dump();
    out += '\n';
  }
  return out;
}

MadSet MadSet::FromJsonLines(std::string_view text) {
  MadSet mad;
  int line_no = 0;
  for (const auto& raw : Split(text, '\n')) {
    ++line_no;
    const auto line = Trim(raw);
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InvalidArgument("madset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("provenance")) continue;
    try {
      SelectionRecord r;
      r.image_id = j.at("image_id").get<std::string>();
      r.defender = j.at("defender").get<std::string>();
      r.attacker = j.at("attacker").get<std::string>();
      r.category = j.at("category").get<int>();
      r.concordance = j.at("concordance").get<double>();
      r.metric = ParseMetric(j.at("metric").get<std::string>());
      r.rank_in_group = j.at("rank_in_group").get<int>();
      if (r.defender == r.attacker) {
        throw InvalidArgument("defender equals attacker");
      }
      mad.Add(std::move(r));
    } catch (const json::exception& e) {
      throw InvalidArgument("madset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("madset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return mad;
}

std::vector<std::string> AssembleAnnotationBatch(const MadSet& mad) {
  if (mad.empty()) throw InvalidArgument("MAD set is empty; nothing to annotate");
  return {mad.images().begin(), mad.images().end()};
}

}  // namespace madseg
