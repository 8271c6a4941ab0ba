// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glasspose/bvh.hpp"
#include "glasspose/geometry.hpp"
#include "glasspose/mesh.hpp"

namespace glasspose {

enum class TirPolicy { kTerminate, kReflect };

std::string ToString(TirPolicy policy);
TirPolicy TirPolicyFromString(const std::string& name);

struct RenderConfig {
  double ior = 1.5;
  /// Background plane z = background_depth in camera frame, meters.
  double background_depth = 2.0;
  /// Interface events allowed per path; longer paths get rho = 0.
  int max_bounces = 8;
  TirPolicy tir_policy = TirPolicy::kTerminate;
  /// 0 selects DefaultThreads().
  int threads = 0;

  void Validate() const;
};

/// Refractive flow, attenuation and visibility mask for one view. Buffers are
/// row-major with row 0 at the top. `flow` interleaves (dx, dy) per pixel.
/// `mask` holds 0/1 for rendered maps; estimated masks may be fractional.
struct RfaMaps {
  int width = 0;
  int height = 0;
  std::vector<double> flow;
  std::vector<double> rho;
  std::vector<double> mask;

  RfaMaps() = default;
  RfaMaps(int w, int h)
      : width(w), height(h), flow(2 * std::size_t(w) * h, 0.0), rho(std::size_t(w) * h, 0.0),
        mask(std::size_t(w) * h, 0.0) {}

  std::size_t PixelCount() const { return std::size_t(width) * height; }
  std::size_t Index(int x, int y) const { return std::size_t(y) * width + x; }
  bool SameSize(const RfaMaps& o) const { return width == o.width && height == o.height; }
  bool operator==(const RfaMaps&) const = default;
};

struct RenderDiagnostics {
  /// Exit ray parallel to (or receding from) the background plane.
  std::int64_t invalid_exit = 0;
  std::int64_t total_internal_reflection = 0;
  std::int64_t bounce_limit = 0;
  /// Interior ray that found no exit surface (numerical leak).
  std::int64_t leaked = 0;
  std::int64_t mask_pixels = 0;
};

/// Snell refraction of a unit `incident` direction at a surface whose unit
/// `normal` opposes it. `eta` = n_incident / n_transmitted. Returns nullopt
/// on total internal reflection.
std::optional<Vec3> RefractDirection(const Vec3& incident, const Vec3& normal, double eta);

Vec3 ReflectDirection(const Vec3& incident, const Vec3& normal);

/// Unpolarized Fresnel transmittance 1 - (Rs + Rp) / 2.
double FresnelTransmittance(double cos_incident, double eta);

/// Holds the acceleration structure for one mesh so repeated renders (pose
/// search) reuse it.
class SceneRenderer {
 public:
  explicit SceneRenderer(const TriangleMesh& mesh);

  RfaMaps RenderRfa(const Pose& pose, const CameraIntrinsics& intr, const RenderConfig& cfg,
                    RenderDiagnostics* diagnostics = nullptr) const;

  /// Camera-frame z of the first hit, 0 on miss.
  std::vector<double> RenderDepth(const Pose& pose, const CameraIntrinsics& intr,
                                  int threads = 0) const;

  /// Object-frame first-hit point per pixel; `valid` marks hits.
  void RenderFirstHits(const Pose& pose, const CameraIntrinsics& intr, int threads,
                       std::vector<Vec3>& points, std::vector<std::uint8_t>& valid) const;

  const TriangleMesh& mesh() const { return *mesh_; }
  const Bvh& bvh() const { return bvh_; }

 private:
  struct PixelRect {
    int x0, y0, x1, y1;  // half-open
  };
  PixelRect Footprint(const Pose& pose, const CameraIntrinsics& intr) const;

  const TriangleMesh* mesh_;
  Bvh bvh_;
};

RfaMaps RenderRfa(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& intr,
                  const RenderConfig& cfg, RenderDiagnostics* diagnostics = nullptr);

std::vector<double> RenderDepth(const TriangleMesh& mesh, const Pose& pose,
                                const CameraIntrinsics& intr, int threads = 0);

/// Background plane depth placed one diameter behind the far extent of the
/// posed mesh.
double SuggestBackgroundDepth(const TriangleMesh& mesh, const Pose& pose);

}  // namespace glasspose
