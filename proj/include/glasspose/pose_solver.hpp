// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glasspose/losses.hpp"
#include "glasspose/refract_render.hpp"

namespace glasspose {

enum class Optimizer { kNelderMead, kFiniteDifference };

std::string ToString(Optimizer optimizer);
Optimizer OptimizerFromString(const std::string& name);

struct SolverOptions {
  double w_flow = 1.0;
  double w_rho = 1.0;
  double w_mask = 10.0;
  Optimizer optimizer = Optimizer::kNelderMead;
  /// Objective evaluations allowed per start.
  int max_evaluations = 400;
  /// Stop a local run once the objective spread over the simplex (or the
  /// decrease of a gradient step) falls below this.
  double tolerance = 1e-6;
  /// Total starts; start 0 is the init pose, the rest are seeded
  /// perturbations of it.
  int multi_start = 8;
  double perturb_rotation_deg = 15.0;
  /// Fraction of the mesh diameter.
  double perturb_translation = 0.10;
  std::uint64_t seed = 0;
  /// Worker threads across starts; 0 selects DefaultThreads().
  int threads = 0;

  void Validate() const;
};

struct TraceEntry {
  int start = 0;
  int evaluations = 0;  // cumulative within the start
  double objective = 0.0;
};

struct SolveResult {
  Pose pose;
  double objective = 0.0;
  double init_objective = 0.0;
  int evaluations = 0;  // summed over starts
  int best_start = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
};

/// Weighted flow/rho/mask discrepancy between the observation and a render at
/// `candidate`. Never reads background pixels.
double Objective(const SceneRenderer& renderer, const Pose& candidate, const RfaMaps& observed,
                 const CameraIntrinsics& intr, const RenderConfig& cfg, const SolverOptions& opts);

/// Render-and-compare pose refinement over a local SE(3) chart: a rotation
/// vector composed on the left of the chart center's rotation plus a
/// translation offset. The chart is re-centered at the incumbent between
/// local runs.
SolveResult SolvePose(const RfaMaps& observed, const TriangleMesh& mesh,
                      const CameraIntrinsics& intr, const RenderConfig& cfg, const Pose& init,
                      const SolverOptions& opts);

/// Least-squares rigid alignment dst ~ R src + t (no scale, no reflection).
/// Throws kDegenerate for fewer than 3 pairs or collinear sources.
Pose Procrustes(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Image-space crop used by the scale-invariant translation encoding. (x, y)
/// is the top-left corner in pixels; `output_size` is the side of the resized
/// network input (zoom = output_size / max(width, height); 0 means zoom 1).
struct CropBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  double output_size = 0.0;

  double zoom() const;
};

/// dx, dy: projected object origin relative to the crop center, divided by
/// the crop size. dz: t_z divided by the zoom.
PoseDeltas EncodeSite(const Pose& pose, const CameraIntrinsics& intr, const CropBox& crop);
Vec3 DecodeSite(const PoseDeltas& deltas, const CameraIntrinsics& intr, const CropBox& crop);

/// Heuristic init: back-projects the mask centroid to `depth` with the given
/// rotation. Throws on an empty mask.
Pose InitFromMask(std::span<const double> mask, const CameraIntrinsics& intr, double depth,
                  const Mat3& rotation = Mat3::Identity());

}  // namespace glasspose
