// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference computations written independently of the library
// code paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "glasspose/compositing.hpp"
#include "glasspose/geometry.hpp"
#include "glasspose/image.hpp"
#include "glasspose/refract_render.hpp"

namespace glasspose::oracles {

/// Unpolarized Fresnel power transmittance from the amplitude coefficients.
inline double Fresnel(double n1, double n2, double cos_i) {
  const double sin_t = n1 / n2 * std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i));
  if (sin_t >= 1.0) return 0.0;
  const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
  const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
  const double rp = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
  return 1.0 - 0.5 * (rs * rs + rp * rp);
}

/// Bilinear lookup as a weighted sum over the four clamped neighbours.
inline double Bilinear(const Image& img, double x, double y, int c) {
  x = std::clamp(x, 0.0, img.width - 1.0);
  y = std::clamp(y, 0.0, img.height - 1.0);
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  double sum = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const double w = (dx ? x - x0 : 1.0 - (x - x0)) * (dy ? y - y0 : 1.0 - (y - y0));
      if (w == 0.0) continue;
      sum += w * img.at(std::min(x0 + dx, img.width - 1), std::min(y0 + dy, img.height - 1), c);
    }
  }
  return sum;
}

struct Inter {
  double flow = 0, rho = 0, mask = 0;
};

/// Column-major loops, unlike the library's row-major pairwise reduction.
inline Inter InterLosses(const RfaMaps& gt, const RfaMaps& est, bool mean) {
  Inter o;
  double support = 0;
  for (int x = 0; x < gt.width; ++x) {
    for (int y = 0; y < gt.height; ++y) {
      const std::size_t i = std::size_t(y) * gt.width + x;
      const double m = gt.mask[i];
      support += m;
      o.flow += m * (std::abs(est.flow[2 * i] - gt.flow[2 * i]) + std::abs(est.flow[2 * i + 1] - gt.flow[2 * i + 1]));
      o.rho += m * std::abs(est.rho[i] - gt.rho[i]);
      o.mask += std::abs(est.mask[i] - gt.mask[i]);
    }
  }
  if (mean) {
    o.flow = support > 0 ? o.flow / support : 0;
    o.rho = support > 0 ? o.rho / support : 0;
    o.mask /= double(gt.PixelCount());
  }
  return o;
}

inline double CompLoss(const RfaMaps& gt, const RfaMaps& est, const Image& bg, bool mean) {
  double sum = 0, support = 0;
  for (int x = 0; x < gt.width; ++x) {
    for (int y = 0; y < gt.height; ++y) {
      const std::size_t i = std::size_t(y) * gt.width + x;
      for (int c = 0; c < bg.channels; ++c) {
        const double base = bg.at(x, y, c);
        const double a = Bilinear(bg, x + gt.flow[2 * i], y + gt.flow[2 * i + 1], c);
        const double b = Bilinear(bg, x + est.flow[2 * i], y + est.flow[2 * i + 1], c);
        const double cg = (1 - gt.mask[i]) * base + gt.mask[i] * gt.rho[i] * a;
        const double ce = (1 - est.mask[i]) * base + est.mask[i] * est.rho[i] * b;
        sum += std::abs(gt.mask[i] * cg - est.mask[i] * ce);
      }
      support += std::max(gt.mask[i], est.mask[i]);
    }
  }
  if (!mean) return sum;
  return support > 0 ? sum / (bg.channels * support) : 0;
}

inline double RotLoss(const Mat3& a, const Mat3& b, const std::vector<Vec3>& pts) {
  double s = 0;
  for (const Vec3& p : pts) {
    const Vec3 d = a * p - b * p;
    s += std::abs(d.x()) + std::abs(d.y()) + std::abs(d.z());
  }
  return s / pts.size();
}

inline double AddS(const Pose& gt, const Pose& est, const std::vector<Vec3>& pts) {
  double s = 0;
  for (const Vec3& p : pts) {
    const Vec3 g = gt.rotation * p + gt.translation;
    double best = INFINITY;
    for (const Vec3& q : pts) best = std::min(best, (est.rotation * q + est.translation - g).norm());
    s += best;
  }
  return s / pts.size();
}

}  // namespace glasspose::oracles
