// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/losses.hpp"

#include <algorithm>
#include <cmath>

#include "glasspose/compositing.hpp"
#include "glasspose/error.hpp"

namespace glasspose {

namespace {

void RequireSameSize(const RfaMaps& a, const RfaMaps& b, const char* what) {
  if (!a.SameSize(b)) {
    Fail(ErrorCode::kInvalidArgument, std::string(what) + ": resolution mismatch");
  }
}

double Normalize(double sum, double support, Reduction reduction) {
  if (reduction == Reduction::kSum) return sum;
  return support > 0.0 ? sum / support : 0.0;
}

}  // namespace

double PairwiseSum(std::span<const double> values) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

double LossFlow(const RfaMaps& gt, const RfaMaps& est, Reduction reduction) {
  RequireSameSize(gt, est, "loss_flow");
  std::vector<double> terms(gt.PixelCount());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double m = gt.mask[i];
    terms[i] = std::abs(m * (est.flow[2 * i] - gt.flow[2 * i])) +
               std::abs(m * (est.flow[2 * i + 1] - gt.flow[2 * i + 1]));
  }
  return Normalize(PairwiseSum(terms), PairwiseSum(gt.mask), reduction);
}

double LossRho(const RfaMaps& gt, const RfaMaps& est, Reduction reduction) {
  RequireSameSize(gt, est, "loss_rho");
  std::vector<double> terms(gt.PixelCount());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = std::abs(gt.mask[i] * (est.rho[i] - gt.rho[i]));
  }
  return Normalize(PairwiseSum(terms), PairwiseSum(gt.mask), reduction);
}

double LossMask(const RfaMaps& gt, const RfaMaps& est, Reduction reduction) {
  RequireSameSize(gt, est, "loss_mask");
  std::vector<double> terms(gt.PixelCount());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::abs(est.mask[i] - gt.mask[i]);
  return Normalize(PairwiseSum(terms), double(terms.size()), reduction);
}

InterLoss LossInter(const RfaMaps& gt, const RfaMaps& est, Reduction reduction) {
  return {LossFlow(gt, est, reduction), LossRho(gt, est, reduction), LossMask(gt, est, reduction)};
}

double LossRot(const Mat3& gt, const Mat3& est, std::span<const Vec3> model_points) {
  if (model_points.empty()) Fail(ErrorCode::kInvalidArgument, "loss_rot: no model points");
  std::vector<double> terms(model_points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = (gt * model_points[i] - est * model_points[i]).lpNorm<1>();
  }
  return PairwiseSum(terms) / double(terms.size());
}

double LossCenter(const PoseDeltas& gt, const PoseDeltas& est) {
  return std::abs(gt.dx - est.dx) + std::abs(gt.dy - est.dy);
}

double LossZ(const PoseDeltas& gt, const PoseDeltas& est) { return std::abs(gt.dz - est.dz); }

PoseLoss LossPose(const Mat3& rot_gt, const Mat3& rot_est, std::span<const Vec3> model_points,
                  const PoseDeltas& deltas_gt, const PoseDeltas& deltas_est) {
  return {LossRot(rot_gt, rot_est, model_points), LossCenter(deltas_gt, deltas_est),
          LossZ(deltas_gt, deltas_est)};
}

double LossComp(const RfaMaps& gt, const RfaMaps& est, const Image& background,
                Reduction reduction) {
  RequireSameSize(gt, est, "loss_comp");
  const Image c_gt = Composite(gt, background);
  const Image c_est = Composite(est, background);
  const int channels = background.channels;
  std::vector<double> terms(gt.PixelCount());
  std::vector<double> support(gt.PixelCount());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    double t = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t k = i * channels + c;
      t += std::abs(gt.mask[i] * c_gt.data[k] - est.mask[i] * c_est.data[k]);
    }
    terms[i] = t;
    support[i] = std::max(gt.mask[i], est.mask[i]);
  }
  return Normalize(PairwiseSum(terms), channels * PairwiseSum(support), reduction);
}

TotalLoss LossTotal(const RfaMaps& gt, const RfaMaps& est, const Image& background,
                    const PoseLossInputs& pose, Reduction reduction) {
  TotalLoss out;
  out.inter = LossInter(gt, est, reduction);
  out.pose = LossPose(pose.rot_gt, pose.rot_est, pose.model_points, pose.deltas_gt, pose.deltas_est);
  out.comp = LossComp(gt, est, background, reduction);
  return out;
}

}  // namespace glasspose
