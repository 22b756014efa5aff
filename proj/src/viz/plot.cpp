// src/viz/plot.cpp
//
// Copyright 2026 The sganlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgan/viz/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace sgan::viz {

void plot_mel_png(const Tensor& mel_db, const std::string& out_path,
                  int cell_pixels) {
  if (mel_db.rank() != 2) throw DataError("plot: mel grid required");
  if (cell_pixels < 1) throw DataError("plot: cell_pixels must be >= 1");
  const long bands = mel_db.dim(0), frames = mel_db.dim(1);
  const long width = frames * cell_pixels;
  const long height = bands * cell_pixels;

  std::vector<unsigned char> image(static_cast<size_t>(width * height));
  for (long b = 0; b < bands; ++b) {
    // low bands at the bottom of the image
    const long row0 = (bands - 1 - b) * cell_pixels;
    for (long t = 0; t < frames; ++t) {
      const double v = mel_db[b * frames + t];
      const double unit = std::clamp((v + 40.0) / 40.0, 0.0, 1.0);
      const unsigned char gray =
          static_cast<unsigned char>(std::lround(unit * 255.0));
      for (int dy = 0; dy < cell_pixels; ++dy)
        for (int dx = 0; dx < cell_pixels; ++dx)
          image[static_cast<size_t>((row0 + dy) * width + t * cell_pixels + dx)] =
              gray;
    }
  }

  FILE* f = std::fopen(out_path.c_str(), "wb");
  if (!f) throw DataError("cannot write PNG: " + out_path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(f);
    throw NumericError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
    throw NumericError("libpng write failed: " + out_path);
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (long y = 0; y < height; ++y)
    png_write_row(png, image.data() + y * width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace sgan::viz
