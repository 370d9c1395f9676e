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

#ifndef MADSEG_TEXT_H_
#define MADSEG_TEXT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace madseg {

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value);

// Whole-string parse; throws InvalidArgument on trailing garbage.
double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);

std::vector<std::string> Split(std::string_view text, char sep);
std::string_view Trim(std::string_view text);

// Throws IoError.
std::string ReadFile(const std::filesystem::path& path);

// Writes through a temporary file and renames it into place.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace madseg

#endif  // MADSEG_TEXT_H_
