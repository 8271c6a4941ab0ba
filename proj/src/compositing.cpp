// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/compositing.hpp"

#include <algorithm>
#include <cmath>

#include "glasspose/error.hpp"

namespace glasspose {

void SampleBackground(const Image& bg, double x, double y, double dx, double dy, double* out) {
  if (bg.empty()) Fail(ErrorCode::kInvalidArgument, "sample_background: empty image");
  const double fx = std::clamp(x + dx, 0.0, double(bg.width - 1));
  const double fy = std::clamp(y + dy, 0.0, double(bg.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, bg.width - 1);
  const int y1 = std::min(y0 + 1, bg.height - 1);
  const double wx = fx - x0;
  const double wy = fy - y0;
  for (int c = 0; c < bg.channels; ++c) {
    double v = bg.at(x0, y0, c);
    if (wx != 0.0) v = (1.0 - wx) * v + wx * bg.at(x1, y0, c);
    if (wy != 0.0) {
      double lower = bg.at(x0, y1, c);
      if (wx != 0.0) lower = (1.0 - wx) * lower + wx * bg.at(x1, y1, c);
      v = (1.0 - wy) * v + wy * lower;
    }
    out[c] = v;
  }
}

Image Composite(const RfaMaps& rfa, const Image& bg) {
  if (rfa.width != bg.width || rfa.height != bg.height) {
    Fail(ErrorCode::kInvalidArgument, "composite: matte is " + std::to_string(rfa.width) + "x" +
                                          std::to_string(rfa.height) + " but background is " +
                                          std::to_string(bg.width) + "x" + std::to_string(bg.height));
  }
  Image out = bg;
  std::array<double, 4> refracted{};
  for (int y = 0; y < bg.height; ++y) {
    for (int x = 0; x < bg.width; ++x) {
      const std::size_t i = rfa.Index(x, y);
      const double m = rfa.mask[i];
      if (m == 0.0) continue;
      SampleBackground(bg, x, y, rfa.flow[2 * i], rfa.flow[2 * i + 1], refracted.data());
      for (int c = 0; c < bg.channels; ++c) {
        out.at(x, y, c) = (1.0 - m) * bg.at(x, y, c) + m * rfa.rho[i] * refracted[c];
      }
    }
  }
  return out;
}

}  // namespace glasspose
