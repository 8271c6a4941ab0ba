// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glasspose/geometry.hpp"
#include "glasspose/mesh.hpp"

namespace glasspose {

/// Object symmetries. Discrete entries are rigid object-frame transforms;
/// continuous axes are discretized on expansion.
struct SymmetrySpec {
  struct Axis {
    Vec3 direction = Vec3::UnitZ();
    Vec3 point = Vec3::Zero();
  };
  std::vector<Pose> discrete;
  std::vector<Axis> continuous;

  bool empty() const { return discrete.empty() && continuous.empty(); }
  void Validate() const;

  /// Identity first, then discrete transforms, then every continuous step
  /// combined with each discrete transform. `max_step` bounds the angular
  /// step as pi / ceil(pi / max_step).
  std::vector<Pose> Expand(double max_step = 0.01) const;
};

/// Exact nearest-neighbour queries over a fixed point set.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);
  /// Distance to the nearest stored point.
  double NearestDistance(const Vec3& query) const;

 private:
  void Build(int begin, int end, int depth);
  void Search(int begin, int end, int depth, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;
};

double Add(const Pose& gt, const Pose& est, std::span<const Vec3> points);
double AddS(const Pose& gt, const Pose& est, std::span<const Vec3> points);
double AddSBruteForce(const Pose& gt, const Pose& est, std::span<const Vec3> points);

/// Fraction of distances strictly below threshold_fraction * diameter.
double AddRecall(std::span<const double> distances, double diameter, double threshold_fraction = 0.1);
double AddRecall(std::span<const double> distances, std::span<const double> diameters,
                 double threshold_fraction = 0.1);

/// min over symmetries S of max_x |P_gt S x - P_est x| (meters).
double Mssd(const Pose& gt, const Pose& est, std::span<const Vec3> points,
            std::span<const Pose> symmetries);
/// Same in projected pixels.
double Mspd(const Pose& gt, const Pose& est, std::span<const Vec3> points,
            std::span<const Pose> symmetries, const CameraIntrinsics& intr);

/// Fraction of the union of the visibility masks where the surfaces are not
/// both visible within `tau` meters. 1 for an empty union.
double Vsd(std::span<const double> depth_gt, std::span<const double> depth_est,
           std::span<const std::uint8_t> visible_gt, std::span<const std::uint8_t> visible_est,
           double tau);
/// Visibility taken as depth > 0.
double Vsd(std::span<const double> depth_gt, std::span<const double> depth_est, double tau);

/// Mean |projection - keypoint| over both coordinates of every keypoint.
double MaeKeypoints(std::span<const Vec3> keypoints_3d, const Pose& est,
                    const CameraIntrinsics& intr, std::span<const Vec2> keypoints_2d);

struct ThresholdGrids {
  std::vector<double> vsd_tau;     // fractions of the diameter
  std::vector<double> vsd_theta;   // error thresholds
  std::vector<double> mssd_theta;  // fractions of the diameter
  std::vector<double> mspd_theta;  // multiples of r = image diagonal / 640

  /// 0.05 .. 0.5 in steps of 0.05 for the VSD and MSSD grids; 5 .. 50 in
  /// steps of 5 for MSPD.
  static ThresholdGrids Default();
};

struct InstanceMetrics {
  std::string id;
  double add = 0.0;
  double add_s = 0.0;
  /// ADD-S for symmetric objects, ADD otherwise.
  double add_or_adds = 0.0;
  bool symmetric = false;
  double mssd = 0.0;
  double mspd = 0.0;
  std::vector<double> vsd;  // per tau in the grid
  double vsd_recall = 0.0;
  double mssd_recall = 0.0;
  double mspd_recall = 0.0;
  double diameter = 0.0;
  std::optional<double> mae;
};

/// Fills the recall fields from the raw errors.
void ComputeRecalls(InstanceMetrics& m, const CameraIntrinsics& intr, const ThresholdGrids& grids);

struct ArScore {
  double vsd = 0.0;
  double mssd = 0.0;
  double mspd = 0.0;
  double ar = 0.0;
};
/// Mean over instances of each recall, then mean of the three.
ArScore ComputeAr(std::span<const InstanceMetrics> instances);

struct EvalOptions {
  ThresholdGrids grids = ThresholdGrids::Default();
  /// Vertices are subsampled by FPS above this count.
  int max_model_points = 10000;
  double add_threshold = 0.1;
  double symmetry_step = 0.01;
  int threads = 0;
};

struct EvalInput {
  std::string id;
  const TriangleMesh* mesh = nullptr;
  Pose gt;
  Pose est;
  CameraIntrinsics intr;
  SymmetrySpec symmetry;
  std::vector<Vec3> keypoints_3d;
  std::vector<Vec2> keypoints_2d;
};

InstanceMetrics EvaluateInstance(const EvalInput& input, const EvalOptions& options);

struct MetricReport {
  std::vector<InstanceMetrics> instances;
  double add_recall_01d = 0.0;
  ArScore ar;
  std::optional<double> mae;
  std::string model_points;  // how ADD points were chosen
};

MetricReport Evaluate(std::span<const EvalInput> inputs, const EvalOptions& options);

}  // namespace glasspose
