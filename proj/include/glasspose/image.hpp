// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace glasspose {

/// Float image with interleaved channels (1 or 3), intensities nominally in
/// [0, 1] and treated as linear.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {}

  double& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const {
    return data[(std::size_t(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }
  bool operator==(const Image&) const = default;
};

/// Raw float map as stored in a PFM file: row-major, top row first.
struct FloatMap {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  std::vector<float> data;
};

/// Writes little-endian PFM (scale -1). Rows are stored bottom-to-top on disk.
void WritePfm(const std::filesystem::path& path, const FloatMap& map);
FloatMap ReadPfm(const std::filesystem::path& path);

/// 8-bit PNG. Gray+alpha and RGBA inputs drop alpha; 16-bit inputs are
/// reduced to 8 bits.
void WritePng8(const std::filesystem::path& path, int width, int height, int channels,
               std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> ReadPng8(const std::filesystem::path& path, int& width, int& height,
                                   int& channels);

/// value / 255 on read; round(clamp(v, 0, 1) * 255) on write.
Image ReadPngImage(const std::filesystem::path& path);
void WritePngImage(const std::filesystem::path& path, const Image& image);
std::uint8_t ToByte(double v);

/// Bilinear resample to a new size (pixel centers aligned).
Image Resize(const Image& image, int width, int height);

}  // namespace glasspose
