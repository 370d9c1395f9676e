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

// Command-line front end for the madseg MAD competition harness.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "madseg/app.h"
#include "madseg/error.h"
#include "madseg/text.h"

namespace {

using madseg::app::fs::path;

struct SharedFlags {
  std::string metric = "miou";
  int k = 1;
  double eps = 1e-6;
  std::string gauge = "zero-sum";
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string scale_source = "defender";
  double threshold = 0.6;
  int repeats = 1;
  bool metric_given = false;

  madseg::SelectionOptions Selection() const {
    madseg::SelectionOptions s;
    s.metric = madseg::ParseMetric(metric);
    s.k = k;
    s.scale_source = madseg::ParseScaleSource(scale_source);
    s.jobs = jobs;
    return s;
  }
  madseg::RankingConfig Ranking() const {
    madseg::RankingConfig c;
    c.epsilon = eps;
    c.gauge = madseg::ParseGauge(gauge);
    return c;
  }
};

std::vector<double> ParseRates(const std::string& text) {
  std::vector<double> rates;
  for (const auto& field : madseg::Split(text, ',')) {
    rates.push_back(madseg::ParseDouble(madseg::Trim(field)));
  }
  return rates;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"madseg: MAD competition for semantic segmentation models"};
  app.set_config("--config", "", "Flat key=value file; keys mirror the shared flags");
  app.fallthrough();
  app.require_subcommand(1);

  SharedFlags flags;
  auto* metric_opt = app.add_option("--metric", flags.metric, "miou | fwiou | mpa")
                         ->check(CLI::IsMember({"miou", "fwiou", "mpa"}));
  app.add_option("--k", flags.k, "Images kept per (pair, category)")->check(CLI::PositiveNumber);
  app.add_option("--eps", flags.eps, "Ratio smoothing constant")->check(CLI::NonNegativeNumber);
  app.add_option("--gauge", flags.gauge, "zero-sum | first-zero | unit-sum")
      ->check(CLI::IsMember({"zero-sum", "first-zero", "unit-sum"}));
  app.add_option("--jobs", flags.jobs, "Worker threads for the concordance scan")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", flags.seed, "Seed for synthesis and side randomization");
  app.add_option("--scale-source", flags.scale_source, "defender | attacker | both")
      ->check(CLI::IsMember({"defender", "attacker", "both"}));
  app.add_option("--threshold", flags.threshold, "Outcome failure threshold")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--repeats", flags.repeats, "2AFC trials per record per rater")
      ->check(CLI::PositiveNumber);

  path manifest, stats, madset, out = ".", state, delta, log_path = "choices.jsonl";
  std::optional<path> annotations, static_dir;
  std::string annotations_str, static_str;

  auto* stats_cmd = app.add_subcommand("stats", "Scale quartiles from labeled maps");
  stats_cmd->add_option("--manifest", manifest)->required();
  stats_cmd->add_option("--out", out, "Output CSV (default stats.csv)");

  auto* select_cmd = app.add_subcommand("select", "Pairwise MAD selection");
  select_cmd->add_option("--manifest", manifest)->required();
  select_cmd->add_option("--stats", stats)->required();
  select_cmd->add_option("--out", out, "Output directory");

  auto* rank_cmd = app.add_subcommand("rank", "Matrices, rankings and reports");
  rank_cmd->add_option("--manifest", manifest)->required();
  rank_cmd->add_option("--madset", madset)->required();
  rank_cmd->add_option("--annotations", annotations_str, "Overrides annotations_dir");
  rank_cmd->add_option("--out", out, "Output (state) directory");

  auto* add_cmd = app.add_subcommand("add-model", "Add one model to a finished competition");
  add_cmd->add_option("--manifest", manifest, "Manifest of the incumbents")->required();
  add_cmd->add_option("--delta", delta, "JSON with the new model entry")->required();
  add_cmd->add_option("--stats", stats)->required();
  add_cmd->add_option("--state", state, "Prior rank output directory")->required();
  add_cmd->add_option("--annotations", annotations_str, "Overrides annotations_dir");
  add_cmd->add_option("--out", out, "Output directory")->required();

  path rank_a, rank_b;
  std::string which = "aggressiveness";
  auto* srcc_cmd = app.add_subcommand("srcc", "Spearman correlation of two rankings");
  srcc_cmd->add_option("a", rank_a)->required();
  srcc_cmd->add_option("b", rank_b)->required();
  srcc_cmd->add_option("--which", which, "aggressiveness | resistance");

  madseg::app::SynthOptions synth;
  std::string noise = "0.05,0.15,0.25,0.35,0.45";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic workspace");
  synth_cmd->add_option("--out", synth.out_dir)->required();
  synth_cmd->add_option("--n-images", synth.config.n_images);
  synth_cmd->add_option("--width", synth.config.width);
  synth_cmd->add_option("--height", synth.config.height);
  synth_cmd->add_option("--classes", synth.config.num_classes, "Including background");
  synth_cmd->add_option("--noise", noise, "Comma-separated noise rate per model");
  synth_cmd->add_option("--train-images", synth.train_images, "Labeled set size");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the 2AFC annotation service");
  serve_cmd->add_option("--manifest", manifest)->required();
  serve_cmd->add_option("--madset", madset)->required();
  serve_cmd->add_option("--log", log_path, "Choice log (JSON Lines)");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "0 picks a free port");
  serve_cmd->add_option("--static-dir", static_str, "Frontend assets to mount at /");

  auto* export_cmd = app.add_subcommand("export", "Matrices from a 2AFC choice log");
  export_cmd->add_option("--manifest", manifest)->required();
  export_cmd->add_option("--madset", madset)->required();
  export_cmd->add_option("--log", log_path)->required();
  export_cmd->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  flags.metric_given = metric_opt->count() > 0;
  if (!annotations_str.empty()) annotations = path(annotations_str);
  if (!static_str.empty()) static_dir = path(static_str);

  try {
    if (*stats_cmd) {
      madseg::app::StatsOptions o{manifest, out == "." ? path("stats.csv") : out};
      madseg::app::CmdStats(o, std::cout);
    } else if (*select_cmd) {
      madseg::app::CmdSelect({manifest, stats, out, flags.Selection()}, std::cout);
    } else if (*rank_cmd) {
      madseg::app::RankOptions o;
      o.manifest = manifest;
      o.madset = madset;
      o.out_dir = out;
      o.annotations = annotations;
      if (flags.metric_given) o.metric = madseg::ParseMetric(flags.metric);
      o.ranking = flags.Ranking();
      o.threshold = flags.threshold;
      madseg::app::CmdRank(o, std::cout);
    } else if (*add_cmd) {
      madseg::app::AddModelOptions o;
      o.manifest = manifest;
      o.delta = delta;
      o.stats = stats;
      o.state_dir = state;
      o.out_dir = out;
      o.annotations = annotations;
      o.selection = flags.Selection();
      o.ranking = flags.Ranking();
      madseg::app::CmdAddModel(o, std::cout);
    } else if (*srcc_cmd) {
      std::cout << madseg::FormatDouble(madseg::app::CmdSrcc(rank_a, rank_b, which)) << "\n";
    } else if (*synth_cmd) {
      synth.config.seed = flags.seed;
      synth.config.noise_rates = ParseRates(noise);
      madseg::app::CmdSynth(synth, std::cout);
    } else if (*serve_cmd) {
      madseg::app::ServeOptions o;
      o.manifest = manifest;
      o.madset = madset;
      o.log = log_path;
      o.host = host;
      o.port = port;
      o.seed = flags.seed;
      o.repeats = flags.repeats;
      o.static_dir = static_dir;
      o.ranking = flags.Ranking();
      madseg::app::CmdServe(o, std::cout);
    } else if (*export_cmd) {
      madseg::app::ExportOptions o;
      o.manifest = manifest;
      o.madset = madset;
      o.log = log_path;
      o.out_dir = out;
      o.seed = flags.seed;
      o.repeats = flags.repeats;
      o.ranking = flags.Ranking();
      madseg::app::CmdExport(o, std::cout);
    }
  } catch (const madseg::Error& e) {
    std::cerr << "madseg: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "madseg: unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
