// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glasspose/error.hpp"

namespace glasspose {

Pose Pose::Inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

bool Pose::IsValid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Mat3 should_be_identity = rotation * rotation.transpose();
  if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose Compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

void CameraIntrinsics::Validate() const {
  std::ostringstream msg;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    msg << "intrinsics: focal lengths must be positive (fx=" << fx << ", fy=" << fy << ")";
  } else if (width < 1 || height < 1) {
    msg << "intrinsics: image size must be positive (" << width << "x" << height << ")";
  } else if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    msg << "intrinsics: principal point (" << cx << ", " << cy << ") outside image";
  } else {
    return;
  }
  Fail(ErrorCode::kInvalidArgument, msg.str());
}

std::vector<Vec3> TransformPoints(const Pose& pose, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(pose.Apply(p));
  return out;
}

Vec2 Project(const CameraIntrinsics& intr, const Vec3& point) {
  if (!(point.z() > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "project: point has non-positive depth");
  }
  return {intr.fx * point.x() / point.z() + intr.cx, intr.fy * point.y() / point.z() + intr.cy};
}

Vec3 Unproject(const CameraIntrinsics& intr, const Vec2& pixel, double depth) {
  return {(pixel.x() - intr.cx) / intr.fx * depth, (pixel.y() - intr.cy) / intr.fy * depth, depth};
}

Ray PixelRay(const CameraIntrinsics& intr, double u, double v) {
  const Vec3 d((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
  return {Vec3::Zero(), d.normalized()};
}

Mat3 RotationFromVector(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix();
}

Vec3 RotationToVector(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

double RotationAngle(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace glasspose
