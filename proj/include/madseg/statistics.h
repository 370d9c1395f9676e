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

#ifndef MADSEG_STATISTICS_H_
#define MADSEG_STATISTICS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace madseg {

// Quantile by linear interpolation between order statistics (the "type 7"
// estimator): h = (n - 1) p, q = x[floor(h)] + (h - floor(h)) (x[floor(h)+1] -
// x[floor(h)]). `sorted` must be ascending and nonempty.
double SortedQuantile(std::span<const double> sorted, double p);

// Copies and sorts before taking the quantile.
double Quantile(std::span<const double> values, double p);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Box-plot summary. Throws InvalidArgument on empty input.
Summary Summarize(std::span<const double> values);

double Mean(std::span<const double> values);

}  // namespace madseg

#endif  // MADSEG_STATISTICS_H_
