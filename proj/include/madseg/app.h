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

#ifndef MADSEG_APP_H_
#define MADSEG_APP_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "madseg/ranking.h"
#include "madseg/segmap.h"
#include "madseg/selection.h"
#include "madseg/synth.h"

namespace madseg::app {

namespace fs = std::filesystem;

struct ModelEntry {
  std::string model_id;
  fs::path prediction_dir;
};

// Benchmark description. Relative paths in the file resolve against the
// manifest's directory; every declared directory must exist at load time.
//
//   {
//     "corpus_root": "images",
//     "classes": ["background", "aeroplane", ...],
//     "ignore_id": 255,
//     "models": [{"model_id": "a", "prediction_dir": "preds/a"}, ...],
//     "labeled_train": "train"            (directory, or a list of files)
//     "annotations_dir": "truth",         (optional)
//     "images": ["id0", "id1", ...]       (optional; default: *.png stems)
//   }
struct Manifest {
  fs::path path;
  fs::path corpus_root;
  ClassCatalog catalog = ClassCatalog::WithClassCount(2);
  std::vector<ModelEntry> models;
  std::vector<fs::path> labeled_train;
  std::optional<fs::path> annotations_dir;
  std::vector<std::string> image_ids;  // sorted

  static Manifest Load(const fs::path& path);
  static Manifest Parse(std::string_view json_text, const fs::path& base_dir);

  std::vector<std::string> model_ids() const;
  Corpus LoadCorpus() const;
  std::vector<PredictionStore> Stores() const;
  // Throws InvalidArgument when no annotations_dir is declared.
  AnnotationStore Annotations() const;
  // Throws InvalidArgument when labeled_train is absent or empty.
  std::vector<LabelMap> LoadLabeledTrain() const;
};

// The first line of a JSON Lines artifact or a JSON "provenance" field.
struct Provenance {
  std::string command;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::pair<std::string, fs::path>> inputs;  // hashed on output

  std::string ToJsonText() const;
  std::vector<std::string> CsvComments() const;
};

struct StatsOptions {
  fs::path manifest;
  fs::path out = "stats.csv";
};
ScaleStats CmdStats(const StatsOptions& options, std::ostream& log);

struct SelectOptions {
  fs::path manifest;
  fs::path stats;
  fs::path out_dir = ".";
  SelectionOptions selection;
};
// Writes madset.jsonl, selection_summary.txt and worklist.txt.
MadSet CmdSelect(const SelectOptions& options, std::ostream& log);

struct RankOptions {
  fs::path manifest;
  fs::path madset;
  fs::path out_dir = ".";
  std::optional<fs::path> annotations;  // overrides the manifest
  std::optional<MetricKind> metric;     // default: the MAD set's metric
  RankingConfig ranking;
  double threshold = 0.6;
};
struct RankResult {
  CompetitionMatrices matrices;
  RankingVector aggressiveness;
  RankingVector resistance;
  OutcomeReport outcomes;
};
// Writes A.csv, R.csv, ranking.json, outcomes.json, subsets.json and a copy of
// the MAD set, which together form the state directory for add-model.
RankResult CmdRank(const RankOptions& options, std::ostream& log);

struct AddModelOptions {
  fs::path manifest;  // the incumbents, in state order
  fs::path delta;     // {"models": [{"model_id", "prediction_dir"}]}
  fs::path stats;
  fs::path state_dir;
  fs::path out_dir = ".";
  std::optional<fs::path> annotations;
  SelectionOptions selection;
  RankingConfig ranking;
};
struct AddModelResult {
  MadSet delta;
  std::vector<std::string> pending;  // delta images still lacking annotations
  std::optional<ExpandedCompetition> expanded;
};
// Always writes delta.jsonl and worklist.txt. When every delta image is
// annotated it also writes the expanded A.csv, R.csv, ranking.json and the
// merged madset.jsonl.
AddModelResult CmdAddModel(const AddModelOptions& options, std::ostream& log);

// Spearman correlation between the mu vectors of two ranking files. Either
// file may be a bare ranking or a ranking.json report, in which case
// `which` selects "aggressiveness" or "resistance".
double CmdSrcc(const fs::path& a, const fs::path& b, const std::string& which);

struct SynthOptions {
  fs::path out_dir;
  synth::SynthConfig config;
  int train_images = 0;  // 0: same count as the corpus
};
// Writes images/, preds/<model>/, truth/, train/ and manifest.json.
void CmdSynth(const SynthOptions& options, std::ostream& log);

struct ServeOptions {
  fs::path manifest;
  fs::path madset;
  fs::path log = "choices.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  int repeats = 1;
  std::optional<fs::path> static_dir;
  RankingConfig ranking;
};
// Serves until SIGINT or SIGTERM. Prints "listening on http://HOST:PORT" once
// bound.
void CmdServe(const ServeOptions& options, std::ostream& log);

struct ExportOptions {
  fs::path manifest;
  fs::path madset;
  fs::path log = "choices.jsonl";
  fs::path out_dir = ".";
  std::uint64_t seed = 0;
  int repeats = 1;
  RankingConfig ranking;
};
// Offline export of a choice log: choices.jsonl, A_2afc.csv, R_2afc.csv and
// ranking_2afc.json.
CompetitionMatrices CmdExport(const ExportOptions& options, std::ostream& log);

}  // namespace madseg::app

#endif  // MADSEG_APP_H_
