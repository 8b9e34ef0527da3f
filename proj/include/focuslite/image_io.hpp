// Copyright 2026 The FocusLite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "focuslite/errors.hpp"
#include "focuslite/tensor.hpp"

// 8-bit raster I/O. PNG goes through libpng; binary PPM/PGM (P6/P5) is
// handled inline.
namespace focuslite::image_io {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline ByteImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw FormatError(path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw FormatError(path.string() + ": " + msg);
  }
  return ByteImage(img.height, img.width, 3, std::move(pixels));
}

inline void write_png(const ByteImage& image,
                      const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PNG output supports 1 or 3 channels");
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0,
                               image.data().data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw FormatError(path.string() + ": " + msg);
  }
}

inline std::size_t read_pnm_int(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  std::size_t value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + static_cast<std::size_t>(c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw FormatError("malformed PNM header");
  return value;
}

inline ByteImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '6' && magic[1] != '5')) {
    throw FormatError(path.string() + ": only binary P5/P6 PNM is supported");
  }
  const std::size_t channels = magic[1] == '6' ? 3 : 1;
  const std::size_t w = read_pnm_int(in);
  const std::size_t h = read_pnm_int(in);
  const std::size_t maxval = read_pnm_int(in);
  if (maxval != 255) throw FormatError(path.string() + ": maxval must be 255");
  if (w == 0 || h == 0) throw FormatError(path.string() + ": empty image");
  std::vector<std::uint8_t> pixels(w * h * channels);
  in.read(reinterpret_cast<char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  return ByteImage(h, w, channels, std::move(pixels));
}

inline void write_pnm(const ByteImage& image,
                      const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PNM output supports 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << (image.channels() == 3 ? "P6" : "P5") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

inline bool is_supported_extension(const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

// Reads an 8-bit image and returns it as 3-channel RGB.
inline ByteImage read_rgb(const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  ByteImage img;
  if (ext == ".png") {
    img = detail::read_png(path);
  } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
    img = detail::read_pnm(path);
  } else {
    throw FormatError(path.string() + ": unsupported image format '" + ext +
                      "'");
  }
  if (img.channels() == 3) return img;
  ByteImage rgb(img.height(), img.width(), 3);
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      for (std::size_t k = 0; k < 3; ++k) rgb.at(r, c, k) = img.at(r, c, 0);
  return rgb;
}

inline void write_image(const ByteImage& image,
                        const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  if (ext == ".png") {
    detail::write_png(image, path);
  } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
    detail::write_pnm(image, path);
  } else {
    throw FormatError(path.string() + ": unsupported image format '" + ext +
                      "'");
  }
}

}  // namespace focuslite::image_io
