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

#include <png.h>

#include <gtest/gtest.h>

#include <cstdio>
#include <random>

#include "madseg/error.h"
#include "madseg/hash.h"
#include "madseg/label_map_io.h"
#include "madseg/statistics.h"
#include "madseg/text.h"
#include "test_util.h"

namespace madseg {
namespace {

using testing::Map;
using testing::TempDir;

// Minimal RGB writer to produce a file the label reader must refuse.
void WriteRgbPng(const std::filesystem::path& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, 2, 1, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_byte row[6] = {1, 2, 3, 4, 5, 6};
  png_write_row(png, row);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

TEST(LabelMapIoTest, GrayAndPaletteRoundTrip) {
  TempDir dir;
  const auto catalog = ClassCatalog::PascalVoc();
  std::mt19937_64 rng(1);
  const auto map = testing::RandomMap(rng, 37, 23, 21, 0.1);
  for (auto flavor : {PngFlavor::kGray, PngFlavor::kPalette}) {
    const auto path = dir / (flavor == PngFlavor::kGray ? "g.png" : "p.png");
    SaveLabelMap(path, map, flavor);
    EXPECT_EQ(LoadLabelMap(path, catalog), map);
  }
}

TEST(LabelMapIoTest, RejectsForeignValuesAndColorImages) {
  TempDir dir;
  SaveLabelMap(dir / "bad.png", Map(2, 1, {0, 40}));
  EXPECT_THROW(LoadLabelMap(dir / "bad.png", ClassCatalog::WithClassCount(3)),
               InvalidArgument);
  EXPECT_EQ(LoadLabelMapUnchecked(dir / "bad.png"), Map(2, 1, {0, 40}));

  WriteRgbPng(dir / "rgb.png");
  EXPECT_THROW(LoadLabelMapUnchecked(dir / "rgb.png"), IoError);
  WriteFile(dir / "junk.png", "not a png");
  EXPECT_THROW(LoadLabelMapUnchecked(dir / "junk.png"), IoError);
  EXPECT_THROW(LoadLabelMapUnchecked(dir / "missing.png"), IoError);
}

TEST(QuantileTest, LinearInterpolationBetweenOrderStatistics) {
  const std::vector<double> sample = {0.4, 0.1, 0.3, 0.2};
  // h = 3p on the sorted sample.
  EXPECT_NEAR(Quantile(sample, 0.25), 0.1 + 0.75 * (0.2 - 0.1), 1e-15);
  EXPECT_NEAR(Quantile(sample, 0.75), 0.3 + 0.25 * (0.4 - 0.3), 1e-15);
  EXPECT_EQ(Quantile(std::vector<double>{0.3}, 0.25), 0.3);
  EXPECT_EQ(Quantile(std::vector<double>{0.3}, 0.75), 0.3);
  EXPECT_THROW(Quantile(std::vector<double>{}, 0.5), InvalidArgument);
}

TEST(QuantilePropertyTest, MatchesRankFormula) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n < 40; ++n) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double h = (n - 1) * p;
      const int lo = static_cast<int>(h);
      const int hi = std::min(lo + 1, n - 1);
      const double expected = sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
      EXPECT_NEAR(Quantile(v, p), expected, 1e-15);
    }
  }
}

TEST(SummaryTest, FiveNumbers) {
  const auto s = Summarize(std::vector<double>{5, 1, 3, 2, 4});
  EXPECT_EQ(s.count, 5u);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q3, 4);
  EXPECT_EQ(s.max, 5);
  EXPECT_EQ(s.mean, 3);
  EXPECT_THROW(Summarize(std::vector<double>{}), InvalidArgument);
}

TEST(TextTest, DoublesRoundTripExactly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(ParseDouble(FormatDouble(x)), x);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_THROW(ParseDouble("1.5x"), InvalidArgument);
  EXPECT_THROW(ParseInt("12x"), InvalidArgument);
  EXPECT_EQ(ParseInt(" 12 "), 12);
  EXPECT_EQ(ParseInt("-42"), -42);
}

TEST(TextTest, SplitAndTrim) {
  EXPECT_EQ(Split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(Trim("  x y\t\r\n"), "x y");
}

TEST(TextTest, WriteFileReplacesContents) {
  TempDir dir;
  WriteFile(dir / "f.txt", "one");
  WriteFile(dir / "f.txt", "two");
  EXPECT_EQ(ReadFile(dir / "f.txt"), "two");
  EXPECT_THROW(ReadFile(dir / "none.txt"), IoError);
}

TEST(HashTest, KnownFnvVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(HashString(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(HashString("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(HashString("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
  EXPECT_NE(MixSeed(1), MixSeed(2));
}

}  // namespace
}  // namespace madseg
