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

#include <cmath>
#include <string>
#include <utility>

#include "madseg/ranking.h"
#include "madseg/text.h"

namespace madseg {

std::string_view MatrixKindName(MatrixKind kind) {
  return kind == MatrixKind::kAggressiveness ? "aggressiveness" : "resistance";
}

PairMatrix PairMatrix::Identity(std::vector<std::string> model_ids, MatrixKind kind) {
  PairMatrix m;
  const std::size_t n = model_ids.size();
  m.model_ids = std::move(model_ids);
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.values[i * n + i] = 1.0;
  m.kind = kind;
  return m;
}

int PairMatrix::IndexOf(std::string_view model_id) const {
  for (int i = 0; i < size(); ++i) {
    if (model_ids[i] == model_id) return i;
  }
  return -1;
}

std::string PairMatrix::ToCsv(std::span<const std::string> comment_lines) const {
  std::string out;
  for (const auto& line : comment_lines) out += "# " + line + "\n";
  out += "model";
  for (const auto& id : model_ids) out += "," + id;
  out += "\n";
  for (int i = 0; i < size(); ++i) {
    out += model_ids[i];
    for (int j = 0; j < size(); ++j) out += "," + FormatDouble(at(i, j));
    out += "\n";
  }
  return out;
}

PairMatrix PairMatrix::FromCsv(std::string_view text, MatrixKind kind) {
  PairMatrix m;
  m.kind = kind;
  bool header_seen = false;
  int row = 0;
  for (const auto& raw : Split(text, '\n')) {
    const auto line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = Split(line, ',');
    if (!header_seen) {
      if (fields.empty() || fields[0] != "model" || fields.size() < 3) {
        throw InvalidArgument("matrix csv: expected header 'model,<id>,<id>...'");
      }
      m.model_ids.assign(fields.begin() + 1, fields.end());
      m.values.assign(m.model_ids.size() * m.model_ids.size(), 0.0);
      header_seen = true;
      continue;
    }
    if (row >= m.size()) throw InvalidArgument("matrix csv: too many rows");
    if (fields.size() != m.model_ids.size() + 1 || fields[0] != m.model_ids[row]) {
      throw InvalidArgument("matrix csv: row " + std::to_string(row + 1) +
                            " does not match the header");
    }
    for (int j = 0; j < m.size(); ++j) {
      const double v = ParseDouble(fields[j + 1]);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("matrix csv: entries must be finite and nonnegative");
      }
      m.at(row, j) = v;
    }
    ++row;
  }
  if (!header_seen || row != m.size()) {
    throw InvalidArgument("matrix csv: incomplete matrix");
  }
  return m;
}

}  // namespace madseg
