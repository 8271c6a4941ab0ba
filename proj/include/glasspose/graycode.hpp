// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "glasspose/refract_render.hpp"

namespace glasspose {

std::uint32_t GrayEncode(std::uint32_t value);
std::uint32_t GrayDecode(std::uint32_t code);

/// Smallest b with 2^b >= n (0 for n == 1).
int BitsFor(int n);

/// Reflected-binary Gray-code stripe patterns for a width x height background.
/// Order: x bit planes (most significant first), y bit planes, all-white,
/// all-black. Each pattern is a 0/1 image, row-major.
struct GrayCodePatternSet {
  int width = 0;
  int height = 0;
  int bits_x = 0;
  int bits_y = 0;
  std::vector<std::vector<std::uint8_t>> patterns;

  std::size_t white_index() const { return std::size_t(bits_x + bits_y); }
  std::size_t black_index() const { return std::size_t(bits_x + bits_y + 1); }
};

GrayCodePatternSet GeneratePatterns(int width, int height);

/// Simulated camera observations (intensities in [0, 1]) of each pattern
/// shown on the background plane behind the object. Masked pixels sample the
/// pattern at the nearest pixel to the refracted landing point and scale it by
/// rho; landing points outside the pattern read 0.
std::vector<std::vector<double>> CaptureThroughObject(const GrayCodePatternSet& patterns,
                                                      const RfaMaps& rfa);

std::vector<std::vector<double>> CaptureThroughObject(const GrayCodePatternSet& patterns,
                                                      const TriangleMesh& mesh, const Pose& pose,
                                                      const CameraIntrinsics& intr,
                                                      const RenderConfig& cfg);

struct DecodeOptions {
  /// Minimum white - black contrast for a decodable pixel.
  double min_contrast = 0.1;
  /// Each bit must sit at least this fraction of the contrast away from the
  /// mid threshold.
  double min_bit_margin = 0.25;
};

struct DecodedFlow {
  int width = 0;
  int height = 0;
  /// Integer-valued (dx, dy), interleaved; zero where not valid.
  std::vector<double> flow;
  std::vector<std::uint8_t> valid;
  std::int64_t decoded = 0;
  /// Masked pixels that failed to decode.
  std::int64_t invalid = 0;
};

/// Decodes every pixel with mask != 0.
DecodedFlow DecodeFlow(const std::vector<std::vector<double>>& observations,
                       const GrayCodePatternSet& patterns, const std::vector<double>& mask,
                       const DecodeOptions& options = {});

}  // namespace glasspose
