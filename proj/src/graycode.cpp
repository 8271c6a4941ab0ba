// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/graycode.hpp"

#include <cmath>

#include "glasspose/error.hpp"

namespace glasspose {

std::uint32_t GrayEncode(std::uint32_t value) { return value ^ (value >> 1); }

std::uint32_t GrayDecode(std::uint32_t code) {
  std::uint32_t value = code;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) value ^= value >> shift;
  return value;
}

int BitsFor(int n) {
  int bits = 0;
  while ((std::int64_t{1} << bits) < n) ++bits;
  return bits;
}

GrayCodePatternSet GeneratePatterns(int width, int height) {
  if (width < 1 || height < 1) Fail(ErrorCode::kInvalidArgument, "generate_patterns: size must be >= 1");
  GrayCodePatternSet set;
  set.width = width;
  set.height = height;
  set.bits_x = BitsFor(width);
  set.bits_y = BitsFor(height);
  const std::size_t n = std::size_t(width) * height;
  for (int b = set.bits_x - 1; b >= 0; --b) {
    std::vector<std::uint8_t> img(n);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) img[std::size_t(y) * width + x] = (GrayEncode(x) >> b) & 1u;
    set.patterns.push_back(std::move(img));
  }
  for (int b = set.bits_y - 1; b >= 0; --b) {
    std::vector<std::uint8_t> img(n);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) img[std::size_t(y) * width + x] = (GrayEncode(y) >> b) & 1u;
    set.patterns.push_back(std::move(img));
  }
  set.patterns.emplace_back(n, 1);
  set.patterns.emplace_back(n, 0);
  return set;
}

std::vector<std::vector<double>> CaptureThroughObject(const GrayCodePatternSet& patterns,
                                                      const RfaMaps& rfa) {
  if (rfa.width != patterns.width || rfa.height != patterns.height) {
    Fail(ErrorCode::kInvalidArgument, "capture: pattern size differs from render size");
  }
  const int w = patterns.width;
  const int h = patterns.height;
  std::vector<std::vector<double>> observations;
  observations.reserve(patterns.patterns.size());
  for (const auto& pattern : patterns.patterns) {
    std::vector<double> obs(pattern.size(), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = rfa.Index(x, y);
        if (rfa.mask[i] == 0.0) {
          obs[i] = pattern[i];
          continue;
        }
        if (rfa.rho[i] == 0.0) continue;
        const double sx = std::floor(x + rfa.flow[2 * i] + 0.5);
        const double sy = std::floor(y + rfa.flow[2 * i + 1] + 0.5);
        if (sx < 0.0 || sy < 0.0 || sx >= w || sy >= h) continue;
        obs[i] = rfa.rho[i] * pattern[std::size_t(sy) * w + std::size_t(sx)];
      }
    }
    observations.push_back(std::move(obs));
  }
  return observations;
}

std::vector<std::vector<double>> CaptureThroughObject(const GrayCodePatternSet& patterns,
                                                      const TriangleMesh& mesh, const Pose& pose,
                                                      const CameraIntrinsics& intr,
                                                      const RenderConfig& cfg) {
  return CaptureThroughObject(patterns, RenderRfa(mesh, pose, intr, cfg));
}

DecodedFlow DecodeFlow(const std::vector<std::vector<double>>& observations,
                       const GrayCodePatternSet& patterns, const std::vector<double>& mask,
                       const DecodeOptions& options) {
  const std::size_t n = std::size_t(patterns.width) * patterns.height;
  if (observations.size() != patterns.patterns.size()) {
    Fail(ErrorCode::kInvalidArgument, "decode_flow: observation count differs from pattern count");
  }
  for (const auto& obs : observations) {
    if (obs.size() != n) Fail(ErrorCode::kInvalidArgument, "decode_flow: observation size mismatch");
  }
  if (mask.size() != n) Fail(ErrorCode::kInvalidArgument, "decode_flow: mask size mismatch");

  DecodedFlow out;
  out.width = patterns.width;
  out.height = patterns.height;
  out.flow.assign(2 * n, 0.0);
  out.valid.assign(n, 0);
  const auto& white = observations[patterns.white_index()];
  const auto& black = observations[patterns.black_index()];

  auto decode_axis = [&](std::size_t i, int first_plane, int bits, double mid, double contrast,
                         std::uint32_t& value) {
    std::uint32_t code = 0;
    for (int b = 0; b < bits; ++b) {
      const double o = observations[first_plane + b][i];
      if (std::abs(o - mid) < options.min_bit_margin * contrast) return false;
      code = (code << 1) | (o > mid ? 1u : 0u);
    }
    value = GrayDecode(code);
    return true;
  };

  for (int y = 0; y < patterns.height; ++y) {
    for (int x = 0; x < patterns.width; ++x) {
      const std::size_t i = std::size_t(y) * patterns.width + x;
      if (mask[i] == 0.0) continue;
      const double contrast = white[i] - black[i];
      const double mid = 0.5 * (white[i] + black[i]);
      std::uint32_t u = 0, v = 0;
      const bool ok = contrast >= options.min_contrast &&
                      decode_axis(i, 0, patterns.bits_x, mid, contrast, u) &&
                      decode_axis(i, patterns.bits_x, patterns.bits_y, mid, contrast, v) &&
                      u < std::uint32_t(patterns.width) && v < std::uint32_t(patterns.height);
      if (!ok) {
        ++out.invalid;
        continue;
      }
      out.valid[i] = 1;
      out.flow[2 * i] = double(u) - x;
      out.flow[2 * i + 1] = double(v) - y;
      ++out.decoded;
    }
  }
  return out;
}

}  // namespace glasspose
