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

#include <chrono>
#include <ctime>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"
#include "madseg/annotate.h"
#include "madseg/app.h"
#include "madseg/error.h"
#include "madseg/hash.h"
#include "madseg/label_map_io.h"
#include "madseg/ranking_json.h"
#include "madseg/text.h"

namespace madseg::app {
namespace {

using Json = nlohmann::ordered_json;

Json ProvenanceJson(const Provenance& p) {
  Json j;
  j["command"] = p.command;
  Json settings = Json::object();
  for (const auto& [k, v] : p.settings) settings[k] = v;
  j["settings"] = std::move(settings);
  Json inputs = Json::object();
  for (const auto& [name, path] : p.inputs) {
    inputs[name] = {{"file", path.filename().string()}, {"fnv1a", HexDigest(HashFile(path))}};
  }
  j["inputs"] = std::move(inputs);
  return j;
}

std::string UtcTimestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteJson(const fs::path& path, const Json& j) { WriteFile(path, j.dump(2) + "\n"); }

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::vector<std::pair<std::string, std::string>> SelectionSettings(
    const SelectionOptions& s) {
  return {{"metric", std::string(MetricName(s.metric))},
          {"k", std::to_string(s.k)},
          {"scale_source", std::string(ScaleSourceName(s.scale_source))}};
}

std::vector<std::pair<std::string, std::string>> RankingSettings(MetricKind metric,
                                                                 const RankingConfig& c) {
  return {{"metric", std::string(MetricName(metric))},
          {"eps", FormatDouble(c.epsilon)},
          {"gauge", std::string(GaugeName(c.gauge))}};
}

ScaleStats LoadStats(const fs::path& path, const ClassCatalog& catalog) {
  return ScaleStats::FromCsv(ReadFile(path), catalog.num_classes());
}

MadSet LoadMadSet(const fs::path& path) { return MadSet::FromJsonLines(ReadFile(path)); }

// Every record's models must be declared in the manifest.
void CheckMadSetModels(const MadSet& mad, const Manifest& manifest) {
  const auto ids = manifest.model_ids();
  const std::set<std::string> known(ids.begin(), ids.end());
  for (const auto& r : mad.records()) {
    for (const auto* id : {&r.defender, &r.attacker}) {
      if (!known.count(*id)) {
        throw InvalidArgument("MAD set references model '" + *id +
                              "' which the manifest does not declare");
      }
    }
  }
}

MetricKind MadSetMetric(const MadSet& mad, std::optional<MetricKind> requested) {
  std::optional<MetricKind> found;
  for (const auto& r : mad.records()) {
    if (found && *found != r.metric) throw InvalidArgument("MAD set mixes metrics");
    found = r.metric;
  }
  if (requested) return *requested;
  return found.value_or(MetricKind::kMiou);
}

std::string SelectionSummary(const MadSet& mad, const Manifest& manifest) {
  std::map<std::pair<std::string, std::string>, std::map<int, int>> cells;
  for (const auto& r : mad.records()) ++cells[{r.defender, r.attacker}][r.category];
  std::string out;
  out += "records: " + std::to_string(mad.records().size()) + "\n";
  out += "unique images: " + std::to_string(mad.images().size()) + "\n";
  out += "\ndefender,attacker,category,records\n";
  for (const auto& [pair, cats] : cells) {
    for (const auto& [cat, n] : cats) {
      out += pair.first + "," + pair.second + "," + manifest.catalog.name(cat) + "," +
             std::to_string(n) + "\n";
    }
  }
  return out;
}

std::string Lines(std::span<const std::string> items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

Json RankingReport(const Provenance& prov, const CompetitionMatrices& m,
                   const RankingVector& a, const RankingVector& r) {
  Json j;
  Json p = ProvenanceJson(prov);
  p["generated_at"] = UtcTimestamp();
  j["provenance"] = std::move(p);
  j["aggressiveness"] = RankingToJson(a);
  j["resistance"] = RankingToJson(r);
  const auto ra = a.Ranks();
  const auto rr = r.Ranks();
  auto table = Json::array();
  for (std::size_t i = 0; i < a.model_ids.size(); ++i) {
    table.push_back({{"model", a.model_ids[i]},
                     {"a_rank", ra[i]},
                     {"r_rank", rr[i]},
                     {"mu_a", a.mu[i]},
                     {"mu_r", r.mu[i]}});
  }
  j["table"] = std::move(table);
  j["coverage_warnings"] = m.warnings;
  return j;
}

void WriteMatrices(const fs::path& dir, const CompetitionMatrices& m, const Provenance& prov,
                   std::string_view suffix = {}) {
  const auto comments = prov.CsvComments();
  WriteFile(dir / ("A" + std::string(suffix) + ".csv"), m.aggressiveness.ToCsv(comments));
  WriteFile(dir / ("R" + std::string(suffix) + ".csv"), m.resistance.ToCsv(comments));
}

std::optional<AnnotationStore> OptionalAnnotations(const Manifest& manifest,
                                                   const std::optional<fs::path>& override) {
  if (override) return AnnotationStore::FromDirectory(*override, manifest.catalog);
  if (manifest.annotations_dir) return manifest.Annotations();
  return std::nullopt;
}

}  // namespace

std::string Provenance::ToJsonText() const {
  Json j;
  j["provenance"] = ProvenanceJson(*this);
  return j.dump();
}

std::vector<std::string> Provenance::CsvComments() const {
  std::vector<std::string> lines;
  lines.push_back("madseg " + command);
  for (const auto& [k, v] : settings) lines.push_back(k + "=" + v);
  for (const auto& [name, path] : inputs) {
    lines.push_back("input " + name + " " + path.filename().string() + " fnv1a=" +
                    HexDigest(HashFile(path)));
  }
  return lines;
}

ScaleStats CmdStats(const StatsOptions& options, std::ostream& log) {
  const Manifest manifest = Manifest::Load(options.manifest);
  const auto labeled = manifest.LoadLabeledTrain();
  const ScaleStats stats = ComputeScaleStats(labeled, manifest.catalog);
  Provenance prov{"stats", {{"labeled_maps", std::to_string(labeled.size())}},
                  {{"manifest", options.manifest}}};
  if (!options.out.parent_path().empty()) EnsureDir(options.out.parent_path());
  WriteFile(options.out, stats.ToCsv(prov.CsvComments()));
  int rows = 0;
  for (int y = 1; y < manifest.catalog.num_classes(); ++y) rows += stats.Get(y) ? 1 : 0;
  log << "stats: " << rows << " of " << manifest.catalog.num_object_classes()
      << " categories from " << labeled.size() << " labeled maps -> " << options.out.string()
      << "\n";
  return stats;
}

MadSet CmdSelect(const SelectOptions& options, std::ostream& log) {
  const Manifest manifest = Manifest::Load(options.manifest);
  if (manifest.models.size() < 2) throw InvalidArgument("selection needs at least two models");
  const ScaleStats stats = LoadStats(options.stats, manifest.catalog);
  const auto stores = manifest.Stores();
  const MadSet mad = RunPairwiseSelection(stores, manifest.LoadCorpus(), stats,
                                          manifest.catalog, options.selection);
  Provenance prov{"select", SelectionSettings(options.selection),
                  {{"manifest", options.manifest}, {"stats", options.stats}}};
  EnsureDir(options.out_dir);
  WriteFile(options.out_dir / "madset.jsonl", mad.ToJsonLines(prov.ToJsonText()));
  WriteFile(options.out_dir / "selection_summary.txt", SelectionSummary(mad, manifest));
  std::vector<std::string> worklist;
  if (!mad.empty()) worklist = AssembleAnnotationBatch(mad);
  WriteFile(options.out_dir / "worklist.txt", Lines(worklist));
  log << "select: " << mad.records().size() << " records, " << mad.images().size()
      << " unique images -> " << (options.out_dir / "madset.jsonl").string() << "\n";
  if (mad.empty()) log << "warning: no image passed the category and scale filters\n";
  return mad;
}

RankResult CmdRank(const RankOptions& options, std::ostream& log) {
  options.ranking.Validate();
  const Manifest manifest = Manifest::Load(options.manifest);
  const MadSet mad = LoadMadSet(options.madset);
  CheckMadSetModels(mad, manifest);
  const MetricKind metric = MadSetMetric(mad, options.metric);
  const AnnotationStore truth = options.annotations
                                    ? AnnotationStore::FromDirectory(*options.annotations,
                                                                     manifest.catalog)
                                    : manifest.Annotations();
  const auto stores = manifest.Stores();
  PerformanceEvaluator evaluator(stores, truth, manifest.catalog, metric);
  evaluator.RequireAnnotations(mad);

  RankResult result;
  result.matrices = BuildMatrices(evaluator, mad, options.ranking);
  result.aggressiveness = MleRank(result.matrices.aggressiveness, options.ranking);
  result.resistance = MleRank(result.matrices.resistance, options.ranking);
  result.outcomes = TallyOutcomes(evaluator, mad, options.threshold);
  const auto subsets = SummarizeSubsets(evaluator, mad);

  auto settings = RankingSettings(metric, options.ranking);
  settings.emplace_back("threshold", FormatDouble(options.threshold));
  const Provenance prov{"rank", settings,
                        {{"manifest", options.manifest}, {"madset", options.madset}}};
  EnsureDir(options.out_dir);
  WriteMatrices(options.out_dir, result.matrices, prov);
  WriteJson(options.out_dir / "ranking.json",
            RankingReport(prov, result.matrices, result.aggressiveness, result.resistance));

  Json outcomes;
  outcomes["provenance"] = ProvenanceJson(prov);
  outcomes["threshold"] = options.threshold;
  auto tally_json = [](const OutcomeTally& t) {
    return Json{{"both_good", t.both_good},
                {"one_fails", t.one_fails},
                {"both_fail", t.both_fail},
                {"total", t.total()}};
  };
  outcomes["overall"] = tally_json(result.outcomes.overall);
  auto per_pair = Json::array();
  for (const auto& [pair, tally] : result.outcomes.per_pair) {
    Json row{{"defender", pair.first}, {"attacker", pair.second}};
    const Json counts = tally_json(tally);
    for (const auto& [k, v] : counts.items()) row[k] = v;
    per_pair.push_back(std::move(row));
  }
  outcomes["per_pair"] = std::move(per_pair);
  WriteJson(options.out_dir / "outcomes.json", outcomes);

  Json subsets_json;
  subsets_json["provenance"] = ProvenanceJson(prov);
  auto models = Json::array();
  for (const auto& s : subsets) {
    Json row;
    row["model"] = s.model_id;
    row["associated_images"] = s.split.associated.size();
    row["remaining_images"] = s.split.remaining.size();
    row["associated"] = s.associated ? SummaryToJson(*s.associated) : Json(nullptr);
    row["remaining"] = s.remaining ? SummaryToJson(*s.remaining) : Json(nullptr);
    models.push_back(std::move(row));
  }
  subsets_json["models"] = std::move(models);
  WriteJson(options.out_dir / "subsets.json", subsets_json);

  // Keeps the state directory self-contained for add-model.
  if (fs::weakly_canonical(options.madset) !=
      fs::weakly_canonical(options.out_dir / "madset.jsonl")) {
    WriteFile(options.out_dir / "madset.jsonl", ReadFile(options.madset));
  }

  for (const auto& w : result.matrices.warnings) log << "warning: " << w << "\n";
  log << "rank: aggressiveness";
  for (const auto& id : result.aggressiveness.Order()) log << " " << id;
  log << "; resistance";
  for (const auto& id : result.resistance.Order()) log << " " << id;
  log << "\n";
  return result;
}

AddModelResult CmdAddModel(const AddModelOptions& options, std::ostream& log) {
  options.ranking.Validate();
  const Manifest manifest = Manifest::Load(options.manifest);
  const fs::path a_path = options.state_dir / "A.csv";
  const fs::path r_path = options.state_dir / "R.csv";
  const fs::path mad_path = options.state_dir / "madset.jsonl";
  for (const auto& p : {a_path, r_path, mad_path}) {
    if (!fs::exists(p)) throw NotFound("missing prior state: " + p.string());
  }
  if (fs::exists(options.out_dir) &&
      fs::equivalent(options.out_dir, options.state_dir)) {
    throw InvalidArgument("--out must differ from --state; the prior state is kept intact");
  }
  CompetitionState prior{PairMatrix::FromCsv(ReadFile(a_path), MatrixKind::kAggressiveness),
                         PairMatrix::FromCsv(ReadFile(r_path), MatrixKind::kResistance),
                         LoadMadSet(mad_path)};
  if (prior.aggressiveness.model_ids != manifest.model_ids() ||
      prior.resistance.model_ids != manifest.model_ids()) {
    throw InvalidArgument("state directory " + options.state_dir.string() +
                          " does not match the manifest's models (ids and order)");
  }
  if (!prior.mad.empty() && MadSetMetric(prior.mad, std::nullopt) != options.selection.metric) {
    throw InvalidArgument("prior MAD set was selected with a different metric");
  }

  const std::string delta_text = ReadFile(options.delta);
  ModelEntry entry;
  try {
    const auto j = nlohmann::json::parse(delta_text);
    const auto& models = j.at("models");
    if (models.size() != 1) throw InvalidArgument("delta must declare exactly one model");
    entry.model_id = models[0].at("model_id").get<std::string>();
    fs::path dir = models[0].at("prediction_dir").get<std::string>();
    if (dir.is_relative()) dir = (options.delta.parent_path() / dir).lexically_normal();
    entry.prediction_dir = dir;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed delta manifest: ") + e.what());
  }
  if (prior.aggressiveness.IndexOf(entry.model_id) >= 0) {
    throw InvalidArgument("model '" + entry.model_id + "' is already in the competition");
  }
  if (!fs::is_directory(entry.prediction_dir)) {
    throw NotFound("prediction_dir of '" + entry.model_id +
                   "' does not exist: " + entry.prediction_dir.string());
  }

  auto stores = manifest.Stores();
  stores.push_back(
      PredictionStore::FromDirectory(entry.model_id, entry.prediction_dir, manifest.catalog));
  const ScaleStats stats = LoadStats(options.stats, manifest.catalog);

  AddModelResult result;
  result.delta = SelectForNewModel(stores, manifest.LoadCorpus(), stats, manifest.catalog,
                                   options.selection);
  auto settings = SelectionSettings(options.selection);
  for (auto& kv : RankingSettings(options.selection.metric, options.ranking)) {
    if (kv.first != "metric") settings.push_back(std::move(kv));
  }
  settings.emplace_back("new_model", entry.model_id);
  const Provenance prov{"add-model", settings,
                        {{"manifest", options.manifest},
                         {"delta", options.delta},
                         {"stats", options.stats},
                         {"prior_A", a_path},
                         {"prior_R", r_path},
                         {"prior_madset", mad_path}}};

  const auto truth = OptionalAnnotations(manifest, options.annotations);
  for (const auto& id : result.delta.images()) {
    if (!truth || !truth->Contains(id)) result.pending.push_back(id);
  }
  EnsureDir(options.out_dir);
  WriteFile(options.out_dir / "delta.jsonl", result.delta.ToJsonLines(prov.ToJsonText()));
  WriteFile(options.out_dir / "worklist.txt", Lines(result.pending));
  log << "add-model: " << result.delta.records().size() << " new records over "
      << result.delta.images().size() << " images for '" << entry.model_id << "'\n";
  if (!result.pending.empty()) {
    log << "add-model: " << result.pending.size()
        << " images need annotation (see worklist.txt); rerun once they are labeled\n";
    return result;
  }

  const AnnotationStore empty_truth = AnnotationStore::InMemory({});
  result.expanded = ExpandCompetition(prior, stores, result.delta,
                                      truth ? *truth : empty_truth, manifest.catalog,
                                      options.selection.metric, options.ranking);
  const auto& ex = *result.expanded;
  WriteMatrices(options.out_dir, ex.matrices, prov);
  WriteJson(options.out_dir / "ranking.json",
            RankingReport(prov, ex.matrices, ex.aggressiveness_ranking, ex.resistance_ranking));
  MadSet merged = prior.mad;
  merged.Append(result.delta);
  WriteFile(options.out_dir / "madset.jsonl", merged.ToJsonLines(prov.ToJsonText()));
  for (const auto& w : ex.matrices.warnings) log << "warning: " << w << "\n";
  log << "add-model: aggressiveness";
  for (const auto& id : ex.aggressiveness_ranking.Order()) log << " " << id;
  log << "; resistance";
  for (const auto& id : ex.resistance_ranking.Order()) log << " " << id;
  log << "\n";
  return result;
}

double CmdSrcc(const fs::path& a, const fs::path& b, const std::string& which) {
  if (which != "aggressiveness" && which != "resistance") {
    throw InvalidArgument("--which must be 'aggressiveness' or 'resistance'");
  }
  auto load = [&](const fs::path& p) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(p));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(p.string() + ": " + e.what());
    }
    if (j.contains("models")) return RankingFromJson(j);
    if (!j.contains(which)) throw InvalidArgument(p.string() + " has no '" + which + "' ranking");
    return RankingFromJson(j[which]);
  };
  const RankingVector ra = load(a);
  const RankingVector rb = load(b);
  if (ra.model_ids.size() != rb.model_ids.size()) {
    throw InvalidArgument("rankings cover different model sets");
  }
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < ra.model_ids.size(); ++i) {
    const auto it = std::find(rb.model_ids.begin(), rb.model_ids.end(), ra.model_ids[i]);
    if (it == rb.model_ids.end()) {
      throw InvalidArgument("model '" + ra.model_ids[i] + "' is missing from " + b.string());
    }
    xa.push_back(ra.mu[i]);
    xb.push_back(rb.mu[it - rb.model_ids.begin()]);
  }
  return Srcc(xa, xb);
}

void CmdSynth(const SynthOptions& options, std::ostream& log) {
  const synth::SynthConfig& config = options.config;
  config.Validate();
  if (config.noise_rates.size() < 2) throw InvalidArgument("--noise needs at least two rates");
  if (options.train_images < 0) throw InvalidArgument("--train-images must be >= 0");
  const fs::path root = options.out_dir;
  for (const char* sub : {"images", "truth", "train", "preds"}) EnsureDir(root / sub);

  const synth::SynthCorpus corpus = synth::GenerateCorpus(config);
  for (const auto& [id, gt] : corpus.ground_truth) {
    SaveLabelMap(root / "images" / (id + ".png"), gt, PngFlavor::kPalette);
    SaveLabelMap(root / "truth" / (id + ".png"), gt);
  }
  synth::SynthConfig train_config = config;
  train_config.n_images = options.train_images > 0 ? options.train_images : config.n_images;
  for (const auto& [id, gt] : synth::GenerateLabeledSet(train_config, "train", "train")) {
    SaveLabelMap(root / "train" / (id + ".png"), gt);
  }

  const auto models = synth::MakeModels(corpus, config);
  const ClassCatalog catalog = ClassCatalog::WithClassCount(config.num_classes);
  Json manifest;
  manifest["corpus_root"] = "images";
  manifest["classes"] = catalog.names();
  manifest["ignore_id"] = catalog.ignore_id();
  auto model_list = Json::array();
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& store = models[k];
    const fs::path dir = root / "preds" / store.model_id();
    EnsureDir(dir);
    for (const auto& image : corpus.corpus.images()) {
      SaveLabelMap(dir / (image.image_id + ".png"), *store.Load(image.image_id));
    }
    model_list.push_back({{"model_id", store.model_id()},
                          {"prediction_dir", "preds/" + store.model_id()},
                          {"noise", config.noise_rates[k]}});
  }
  manifest["models"] = std::move(model_list);
  manifest["labeled_train"] = "train";
  manifest["annotations_dir"] = "truth";
  manifest["provenance"] = {{"command", "synth"},
                            {"seed", config.seed},
                            {"n_images", config.n_images},
                            {"width", config.width},
                            {"height", config.height},
                            {"num_classes", config.num_classes},
                            {"train_images", train_config.n_images}};
  WriteJson(root / "manifest.json", manifest);
  log << "synth: " << config.n_images << " images, " << models.size() << " models -> "
      << (root / "manifest.json").string() << "\n";
}

CompetitionMatrices CmdExport(const ExportOptions& options, std::ostream& log) {
  options.ranking.Validate();
  const Manifest manifest = Manifest::Load(options.manifest);
  const MadSet mad = LoadMadSet(options.madset);
  CheckMadSetModels(mad, manifest);
  const auto trials = annotate::BuildTrials(mad, {options.seed, options.repeats});
  const auto replayed =
      annotate::ReplayChoiceLog(ReadFile(options.log), trials, options.log.string());
  const auto ids = manifest.model_ids();
  const auto result =
      annotate::ExportChoices(trials, replayed.records, ids, options.ranking);

  const Provenance prov{"export",
                        {{"seed", std::to_string(options.seed)},
                         {"repeats", std::to_string(options.repeats)},
                         {"eps", FormatDouble(options.ranking.epsilon)},
                         {"gauge", std::string(GaugeName(options.ranking.gauge))}},
                        {{"manifest", options.manifest},
                         {"madset", options.madset},
                         {"choices", options.log}}};
  EnsureDir(options.out_dir);
  const fs::path log_out = options.out_dir / "choices.jsonl";
  if (fs::weakly_canonical(log_out) != fs::weakly_canonical(options.log)) {
    WriteFile(log_out, result.log_jsonl);
  }
  WriteMatrices(options.out_dir, result.matrices, prov, "_2afc");
  const RankingVector a = MleRank(result.matrices.aggressiveness, options.ranking);
  const RankingVector r = MleRank(result.matrices.resistance, options.ranking);
  Json report = RankingReport(prov, result.matrices, a, r);
  report["provenance"].erase("generated_at");
  WriteJson(options.out_dir / "ranking_2afc.json", report);
  log << "export: " << replayed.records.size() << " choices over " << trials.size()
      << " trials -> " << options.out_dir.string() << "\n";
  return result.matrices;
}

}  // namespace madseg::app
