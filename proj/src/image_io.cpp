// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "glasspose/error.hpp"
#include "glasspose/image.hpp"

namespace glasspose {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) Fail(ErrorCode::kIo, std::string("cannot open ") + path.string());
  return f;
}

std::uint32_t ToLittleEndian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
  }
  return v;
}

}  // namespace

void WritePfm(const std::filesystem::path& path, const FloatMap& map) {
  if (map.channels != 1 && map.channels != 3) Fail(ErrorCode::kInvalidArgument, "pfm: channels must be 1 or 3");
  if (map.data.size() != std::size_t(map.width) * map.height * map.channels) {
    Fail(ErrorCode::kInvalidArgument, "pfm: buffer size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << (map.channels == 3 ? "PF" : "Pf") << '\n' << map.width << ' ' << map.height << '\n' << "-1.0\n";
  const std::size_t row_len = std::size_t(map.width) * map.channels;
  std::vector<std::uint32_t> row(row_len);
  for (int y = map.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row_len; ++i) {
      row[i] = ToLittleEndian(std::bit_cast<std::uint32_t>(map.data[y * row_len + i]));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row_len * sizeof(std::uint32_t));
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

FloatMap ReadPfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  FloatMap map;
  double scale = 0.0;
  in >> magic >> map.width >> map.height >> scale;
  if (!in || (magic != "PF" && magic != "Pf")) Fail(ErrorCode::kParse, "pfm: bad header in " + path.string());
  if (map.width <= 0 || map.height <= 0 || scale == 0.0) Fail(ErrorCode::kParse, "pfm: bad dimensions or scale");
  in.get();  // single whitespace after the scale
  map.channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  const std::size_t row_len = std::size_t(map.width) * map.channels;
  map.data.resize(row_len * map.height);
  std::vector<std::uint32_t> row(row_len);
  for (int y = map.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row_len * sizeof(std::uint32_t));
    if (!in) Fail(ErrorCode::kParse, "pfm: truncated data in " + path.string());
    for (std::size_t i = 0; i < row_len; ++i) {
      std::uint32_t v = row[i];
      const bool swap = little != (std::endian::native == std::endian::little);
      if (swap) v = (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
      map.data[y * row_len + i] = std::bit_cast<float>(v);
    }
  }
  return map;
}

void WritePng8(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const std::uint8_t> pixels) {
  if (channels != 1 && channels != 3) Fail(ErrorCode::kInvalidArgument, "png: channels must be 1 or 3");
  if (pixels.size() != std::size_t(width) * height * channels) {
    Fail(ErrorCode::kInvalidArgument, "png: buffer size mismatch");
  }
  FilePtr file = OpenFile(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kInternal, "png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "png: write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + std::size_t(y) * width * channels));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> ReadPng8(const std::filesystem::path& path, int& width, int& height,
                                   int& channels) {
  FilePtr file = OpenFile(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    Fail(ErrorCode::kParse, "not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kInternal, "png: allocation failed");
  }
  std::vector<std::uint8_t> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kParse, "png: decode failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  pixels.resize(std::size_t(width) * height * channels);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, pixels.data() + std::size_t(y) * width * channels, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

std::uint8_t ToByte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

Image ReadPngImage(const std::filesystem::path& path) {
  int w = 0, h = 0, c = 0;
  const auto bytes = ReadPng8(path, w, h, c);
  if (c != 1 && c != 3) Fail(ErrorCode::kParse, "png: unsupported channel count in " + path.string());
  Image img(w, h, c);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

void WritePngImage(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes(image.data.size());
  std::transform(image.data.begin(), image.data.end(), bytes.begin(), ToByte);
  WritePng8(path, image.width, image.height, image.channels, bytes);
}

Image Resize(const Image& image, int width, int height) {
  if (width < 1 || height < 1 || image.empty()) Fail(ErrorCode::kInvalidArgument, "resize: bad size");
  Image out(width, height, image.channels);
  const double sx = double(image.width) / width;
  const double sy = double(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(image.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(image.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1 - wx) * image.at(x0, y0, c) + wx * image.at(x1, y0, c);
        const double bot = (1 - wx) * image.at(x0, y1, c) + wx * image.at(x1, y1, c);
        out.at(x, y, c) = (1 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

}  // namespace glasspose
