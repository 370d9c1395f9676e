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

#include "madseg/label_map_io.h"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "madseg/error.h"

namespace madseg {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the message is stashed here so the
// C++ side can raise a proper exception after the jump.
struct PngErrorSink {
  std::string message;
};

void OnPngError(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink != nullptr) sink->message = msg;
  png_longjmp(png, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

// Standard PASCAL VOC colormap: bit-interleaved RGB from the class index.
png_color VocColor(int index) {
  int r = 0, g = 0, b = 0;
  int c = index;
  for (int shift = 7; shift >= 0; --shift) {
    r |= ((c >> 0) & 1) << shift;
    g |= ((c >> 1) & 1) << shift;
    b |= ((c >> 2) & 1) << shift;
    c >>= 3;
  }
  return png_color{static_cast<png_byte>(r), static_cast<png_byte>(g),
                   static_cast<png_byte>(b)};
}

// Owns the libpng read structs. The setjmp frames live in ReadHeader and
// ReadRows, which touch only plain data, so a longjmp never skips a C++
// destructor.
struct ReadContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngErrorSink sink;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  int bit_depth = 0;

  ReadContext() = default;
  ReadContext(const ReadContext&) = delete;
  ReadContext& operator=(const ReadContext&) = delete;
  ~ReadContext() {
    if (png != nullptr) png_destroy_read_struct(&png, &info, nullptr);
  }
};

bool ReadHeader(ReadContext& ctx, std::FILE* file) {
  if (setjmp(png_jmpbuf(ctx.png)) != 0) return false;
  png_init_io(ctx.png, file);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);
  ctx.width = png_get_image_width(ctx.png, ctx.info);
  ctx.height = png_get_image_height(ctx.png, ctx.info);
  ctx.color_type = png_get_color_type(ctx.png, ctx.info);
  ctx.bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  return true;
}

// Sub-byte depths are unpacked to one value per byte; palettes stay indices.
bool ReadRows(ReadContext& ctx, png_bytepp rows) {
  if (setjmp(png_jmpbuf(ctx.png)) != 0) return false;
  if (ctx.bit_depth < 8) png_set_packing(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  png_read_image(ctx.png, rows);
  png_read_end(ctx.png, nullptr);
  return true;
}

struct WriteContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngErrorSink sink;

  WriteContext() = default;
  WriteContext(const WriteContext&) = delete;
  WriteContext& operator=(const WriteContext&) = delete;
  ~WriteContext() {
    if (png != nullptr) png_destroy_write_struct(&png, &info);
  }
};

bool WriteImage(WriteContext& ctx, std::FILE* file, png_uint_32 width,
                png_uint_32 height, bool palette, png_colorp colors,
                png_bytepp rows) {
  if (setjmp(png_jmpbuf(ctx.png)) != 0) return false;
  png_init_io(ctx.png, file);
  png_set_IHDR(ctx.png, ctx.info, width, height, 8,
               palette ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (palette) png_set_PLTE(ctx.png, ctx.info, colors, 256);
  png_write_info(ctx.png, ctx.info);
  png_write_image(ctx.png, rows);
  png_write_end(ctx.png, nullptr);
  return true;
}

}  // namespace

LabelMap LoadLabelMapUnchecked(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open label map " + path.string());

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw IoError(path.string() + " is not a PNG file");
  }

  ReadContext ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx.sink,
                                   OnPngError, OnPngWarning);
  if (ctx.png == nullptr) throw IoError("libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) throw IoError("libpng initialization failed");

  if (!ReadHeader(ctx, file.get())) {
    throw IoError("cannot decode " + path.string() + ": " + ctx.sink.message);
  }
  if (ctx.color_type != PNG_COLOR_TYPE_GRAY &&
      ctx.color_type != PNG_COLOR_TYPE_PALETTE) {
    throw IoError(path.string() +
                  ": not a single-channel or palette label map (color type " +
                  std::to_string(ctx.color_type) + ")");
  }
  if (ctx.bit_depth > 8) {
    throw IoError(path.string() + ": bit depth " +
                  std::to_string(ctx.bit_depth) + " is not supported");
  }
  if (ctx.width == 0 || ctx.height == 0) {
    throw IoError(path.string() + ": image has a zero dimension");
  }

  const int width = static_cast<int>(ctx.width);
  const int height = static_cast<int>(ctx.height);
  std::vector<ClassId> pixels(static_cast<std::size_t>(width) * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
  }
  if (!ReadRows(ctx, rows.data())) {
    throw IoError("cannot decode " + path.string() + ": " + ctx.sink.message);
  }
  return LabelMap(width, height, std::move(pixels));
}

LabelMap LoadLabelMap(const std::filesystem::path& path,
                      const ClassCatalog& catalog) {
  LabelMap map = LoadLabelMapUnchecked(path);
  try {
    map.Validate(catalog);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return map;
}

void SaveLabelMap(const std::filesystem::path& path, const LabelMap& map,
                  PngFlavor flavor) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write label map " + path.string());

  WriteContext ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx.sink,
                                    OnPngError, OnPngWarning);
  if (ctx.png == nullptr) throw IoError("libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) throw IoError("libpng initialization failed");

  std::vector<png_color> palette(256);
  for (int i = 0; i < 256; ++i) palette[i] = VocColor(i);
  // 255 is the customary void color in VOC-style maps.
  palette[255] = png_color{224, 224, 192};

  std::vector<ClassId> pixels(map.pixels().begin(), map.pixels().end());
  std::vector<png_bytep> rows(map.height());
  for (int y = 0; y < map.height(); ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * map.width();
  }
  if (!WriteImage(ctx, file.get(), map.width(), map.height(),
                  flavor == PngFlavor::kPalette, palette.data(), rows.data())) {
    throw IoError("cannot encode " + path.string() + ": " + ctx.sink.message);
  }
  if (std::fflush(file.get()) != 0) {
    throw IoError("cannot write label map " + path.string());
  }
}

}  // namespace madseg
