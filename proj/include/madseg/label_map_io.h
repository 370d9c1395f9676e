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

#ifndef MADSEG_LABEL_MAP_IO_H_
#define MADSEG_LABEL_MAP_IO_H_

#include <filesystem>

#include "madseg/segmap.h"

namespace madseg {

enum class PngFlavor {
  kGray,     // 8-bit single channel, value = class id
  kPalette,  // palette-indexed, index = class id, VOC-style colormap
};

// Reads an 8-bit grayscale or palette-indexed PNG (palette indices are
// taken as class ids, never expanded to colors). Throws IoError for
// unreadable or non-label images and InvalidArgument for pixel values
// outside the catalog.
LabelMap LoadLabelMap(const std::filesystem::path& path,
                      const ClassCatalog& catalog);

// Same decode without catalog validation.
LabelMap LoadLabelMapUnchecked(const std::filesystem::path& path);

void SaveLabelMap(const std::filesystem::path& path, const LabelMap& map,
                  PngFlavor flavor = PngFlavor::kGray);

}  // namespace madseg

#endif  // MADSEG_LABEL_MAP_IO_H_
