// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <span>
#include <vector>

namespace glasspose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid object-to-camera transform x_cam = R * x_obj + t. Translation in
/// meters.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose Identity() { return {}; }

  Vec3 Apply(const Vec3& x) const { return rotation * x + translation; }
  Pose Inverse() const;

  /// Checks R R^T = I and det R = 1 within `tol`.
  bool IsValid(double tol = 1e-9) const;
};

/// (a * b)(x) = a(b(x)).
Pose Compose(const Pose& a, const Pose& b);

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void Validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

std::vector<Vec3> TransformPoints(const Pose& pose, std::span<const Vec3> points);

/// Pinhole projection of a camera-frame point. Pixel centers sit at integer
/// coordinates. Throws on z <= 0.
Vec2 Project(const CameraIntrinsics& intr, const Vec3& point);

/// Camera-frame point on the ray through `pixel` with z = `depth`.
Vec3 Unproject(const CameraIntrinsics& intr, const Vec2& pixel, double depth);

/// Unit-direction camera ray through the given (continuous) pixel.
Ray PixelRay(const CameraIntrinsics& intr, double u, double v);

/// Rotation matrix from an axis-angle vector (angle = norm).
Mat3 RotationFromVector(const Vec3& rotvec);
Vec3 RotationToVector(const Mat3& rotation);

/// Geodesic angle between two rotations, radians.
double RotationAngle(const Mat3& a, const Mat3& b);

}  // namespace glasspose
