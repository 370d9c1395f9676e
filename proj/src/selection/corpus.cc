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
#include <utility>

#include "madseg/error.h"
#include "madseg/label_map_io.h"
#include "madseg/selection.h"

namespace madseg {

Corpus::Corpus(std::vector<ImageRef> images) : images_(std::move(images)) {
  std::sort(images_.begin(), images_.end(),
            [](const ImageRef& a, const ImageRef& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i].image_id.empty()) throw InvalidArgument("empty image id in corpus");
    if (i > 0 && images_[i].image_id == images_[i - 1].image_id) {
      throw InvalidArgument("duplicate image id '" + images_[i].image_id + "' in corpus");
    }
  }
}

Corpus Corpus::FromIds(std::vector<std::string> ids) {
  std::vector<ImageRef> refs;
  refs.reserve(ids.size());
  for (auto& id : ids) {
    std::string path = id + ".png";
    refs.push_back(ImageRef{std::move(id), std::move(path)});
  }
  return Corpus(std::move(refs));
}

const ImageRef* Corpus::Find(std::string_view image_id) const {
  auto it = std::lower_bound(
      images_.begin(), images_.end(), image_id,
      [](const ImageRef& ref, std::string_view id) { return ref.image_id < id; });
  if (it == images_.end() || it->image_id != image_id) return nullptr;
  return &*it;
}

PredictionStore PredictionStore::InMemory(std::string model_id,
                                          std::map<std::string, LabelMap> maps) {
  auto shared =
      std::make_shared<std::map<std::string, std::shared_ptr<const LabelMap>>>();
  for (auto& [id, map] : maps) {
    shared->emplace(id, std::make_shared<const LabelMap>(std::move(map)));
  }
  PredictionStore store;
  store.model_id_ = std::move(model_id);
  store.maps_ = std::move(shared);
  return store;
}

PredictionStore PredictionStore::FromDirectory(std::string model_id,
                                               std::filesystem::path dir,
                                               ClassCatalog catalog) {
  if (!std::filesystem::is_directory(dir)) {
    throw NotFound("prediction directory for model '" + model_id +
                   "' does not exist: " + dir.string());
  }
  PredictionStore store;
  store.model_id_ = std::move(model_id);
  store.dir_ = std::move(dir);
  store.catalog_ = std::move(catalog);
  return store;
}

bool PredictionStore::Contains(const std::string& image_id) const {
  if (maps_) return maps_->count(image_id) != 0;
  return std::filesystem::is_regular_file(PathFor(image_id));
}

std::filesystem::path PredictionStore::PathFor(const std::string& image_id) const {
  if (maps_) return {};
  return dir_ / (image_id + ".png");
}

std::shared_ptr<const LabelMap> PredictionStore::Load(
    const std::string& image_id) const {
  if (maps_) {
    auto it = maps_->find(image_id);
    if (it == maps_->end()) {
      throw NotFound("model '" + model_id_ + "' has no prediction for image '" +
                     image_id + "'");
    }
    return it->second;
  }
  const auto path = PathFor(image_id);
  if (!std::filesystem::is_regular_file(path)) {
    throw NotFound("model '" + model_id_ + "' has no prediction for image '" +
                   image_id + "' (expected " + path.string() + ")");
  }
  return std::make_shared<const LabelMap>(LoadLabelMap(path, *catalog_));
}

}  // namespace madseg
