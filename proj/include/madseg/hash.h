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

#ifndef MADSEG_HASH_H_
#define MADSEG_HASH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace madseg {

// 64-bit FNV-1a. Used for provenance fingerprints and for deriving
// per-item random substreams; not a cryptographic hash.
class Fnv1a {
 public:
  Fnv1a& Update(std::string_view bytes);
  Fnv1a& Update(std::uint64_t value);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t HashString(std::string_view bytes);

// Hash of a file's contents. Throws IoError when the file cannot be read.
std::uint64_t HashFile(const std::filesystem::path& path);

std::string HexDigest(std::uint64_t value);

// SplitMix64 finalizer; mixes a 64-bit value into a well-distributed seed.
std::uint64_t MixSeed(std::uint64_t value);

}  // namespace madseg

#endif  // MADSEG_HASH_H_
