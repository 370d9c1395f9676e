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

#include <algorithm>
#include <set>

#include "json.hpp"
#include "madseg/app.h"
#include "madseg/error.h"
#include "madseg/label_map_io.h"
#include "madseg/text.h"

namespace madseg::app {
namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

fs::path RequireDir(const fs::path& dir, std::string_view what) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw NotFound(std::string(what) + " directory does not exist: " + dir.string());
  }
  return dir;
}

std::vector<std::string> PngStems(const fs::path& dir) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

Manifest Manifest::Load(const fs::path& path) {
  Manifest m = Parse(ReadFile(path), path.parent_path().empty() ? fs::path(".")
                                                                : path.parent_path());
  m.path = path;
  return m;
}

Manifest Manifest::Parse(std::string_view json_text, const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("manifest is not valid JSON: ") + e.what());
  }
  Manifest m;
  try {
    m.corpus_root = RequireDir(Resolve(base_dir, j.at("corpus_root").get<std::string>()),
                               "corpus_root");
    const int ignore = j.value("ignore_id", static_cast<int>(kDefaultIgnoreId));
    if (ignore < 0 || ignore > 255) throw InvalidArgument("ignore_id must be in [0, 255]");
    m.catalog = ClassCatalog(j.at("classes").get<std::vector<std::string>>(),
                             static_cast<ClassId>(ignore));

    std::set<std::string> seen;
    for (const auto& entry : j.at("models")) {
      ModelEntry model;
      model.model_id = entry.at("model_id").get<std::string>();
      if (model.model_id.empty()) throw InvalidArgument("model_id must not be empty");
      if (!seen.insert(model.model_id).second) {
        throw InvalidArgument("duplicate model_id '" + model.model_id + "'");
      }
      model.prediction_dir = RequireDir(
          Resolve(base_dir, entry.at("prediction_dir").get<std::string>()),
          "prediction_dir of '" + model.model_id + "'");
      m.models.push_back(std::move(model));
    }

    if (j.contains("labeled_train")) {
      const auto& lt = j["labeled_train"];
      if (lt.is_string()) {
        const fs::path dir = RequireDir(Resolve(base_dir, lt.get<std::string>()),
                                        "labeled_train");
        for (const auto& id : PngStems(dir)) m.labeled_train.push_back(dir / (id + ".png"));
      } else {
        for (const auto& p : lt) m.labeled_train.push_back(Resolve(base_dir, p.get<std::string>()));
      }
    }
    if (j.contains("annotations_dir")) {
      m.annotations_dir = RequireDir(
          Resolve(base_dir, j["annotations_dir"].get<std::string>()), "annotations_dir");
    }
    if (j.contains("images")) {
      m.image_ids = j["images"].get<std::vector<std::string>>();
      std::sort(m.image_ids.begin(), m.image_ids.end());
    } else {
      m.image_ids = PngStems(m.corpus_root);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::vector<std::string> Manifest::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& m : models) ids.push_back(m.model_id);
  return ids;
}

Corpus Manifest::LoadCorpus() const {
  if (image_ids.empty()) throw InvalidArgument("corpus " + corpus_root.string() + " is empty");
  return Corpus::FromIds(image_ids);
}

std::vector<PredictionStore> Manifest::Stores() const {
  std::vector<PredictionStore> stores;
  for (const auto& m : models) {
    stores.push_back(PredictionStore::FromDirectory(m.model_id, m.prediction_dir, catalog));
  }
  return stores;
}

AnnotationStore Manifest::Annotations() const {
  if (!annotations_dir) throw InvalidArgument("manifest declares no annotations_dir");
  return AnnotationStore::FromDirectory(*annotations_dir, catalog);
}

std::vector<LabelMap> Manifest::LoadLabeledTrain() const {
  if (labeled_train.empty()) {
    throw InvalidArgument("manifest provides no labeled_train maps; scale statistics need them");
  }
  std::vector<LabelMap> maps;
  maps.reserve(labeled_train.size());
  for (const auto& p : labeled_train) maps.push_back(LoadLabelMap(p, catalog));
  return maps;
}

}  // namespace madseg::app
