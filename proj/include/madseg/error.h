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

#ifndef MADSEG_ERROR_H_
#define MADSEG_ERROR_H_

#include <stdexcept>
#include <string>

namespace madseg {

// Base class for every error raised by the library. Callers that only need
// to report a failure can catch this; the subclasses exist so that the CLI
// and the HTTP service can map failures to exit codes and status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad pixel values, mismatched dimensions, bad flags.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A referenced entity (file, prediction, annotation, trial) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// A request conflicts with state that was already recorded.
class Conflict : public Error {
 public:
  using Error::Error;
};

}  // namespace madseg

#endif  // MADSEG_ERROR_H_
