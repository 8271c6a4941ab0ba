// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "glasspose/geometry.hpp"
#include "glasspose/image.hpp"
#include "glasspose/refract_render.hpp"

namespace glasspose {

// Forward losses over the matte and pose parameterization. Arguments follow
// (ground truth, estimate) order. Gated losses use the ground-truth mask.

enum class Reduction {
  /// Divide by the gating support (mask pixels) so values are resolution
  /// independent.
  kMean,
  /// The literal L1 norm.
  kSum,
};

/// Scale-invariant translation parameters: 2D center offset relative to the
/// crop, and zoom-scaled depth.
struct PoseDeltas {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
};

/// Row-major pairwise summation; fixed order for reproducibility.
double PairwiseSum(std::span<const double> values);

double LossFlow(const RfaMaps& gt, const RfaMaps& est, Reduction reduction = Reduction::kMean);
double LossRho(const RfaMaps& gt, const RfaMaps& est, Reduction reduction = Reduction::kMean);
/// Ungated; uses the estimate's (possibly fractional) mask.
double LossMask(const RfaMaps& gt, const RfaMaps& est, Reduction reduction = Reduction::kMean);

struct InterLoss {
  double flow = 0.0;
  double rho = 0.0;
  double mask = 0.0;
  double total() const { return flow + rho + mask; }
};
InterLoss LossInter(const RfaMaps& gt, const RfaMaps& est, Reduction reduction = Reduction::kMean);

/// Mean over points of |R_gt x - R_est x|_1.
double LossRot(const Mat3& gt, const Mat3& est, std::span<const Vec3> model_points);
double LossCenter(const PoseDeltas& gt, const PoseDeltas& est);
double LossZ(const PoseDeltas& gt, const PoseDeltas& est);

struct PoseLoss {
  double rot = 0.0;
  double center = 0.0;
  double z = 0.0;
  double total() const { return rot + center + z; }
};
PoseLoss LossPose(const Mat3& rot_gt, const Mat3& rot_est, std::span<const Vec3> model_points,
                  const PoseDeltas& deltas_gt, const PoseDeltas& deltas_est);

/// L1 between the two mask-gated composites on the same background. Mean mode
/// divides by channels x |mask_gt union mask_est|.
double LossComp(const RfaMaps& gt, const RfaMaps& est, const Image& background,
                Reduction reduction = Reduction::kMean);

struct TotalLoss {
  InterLoss inter;
  PoseLoss pose;
  double comp = 0.0;
  double total() const { return inter.total() + pose.total() + comp; }
};

struct PoseLossInputs {
  Mat3 rot_gt = Mat3::Identity();
  Mat3 rot_est = Mat3::Identity();
  std::vector<Vec3> model_points;
  PoseDeltas deltas_gt;
  PoseDeltas deltas_est;
};

TotalLoss LossTotal(const RfaMaps& gt, const RfaMaps& est, const Image& background,
                    const PoseLossInputs& pose, Reduction reduction = Reduction::kMean);

}  // namespace glasspose
