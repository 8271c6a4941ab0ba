// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "glasspose/geometry.hpp"

namespace glasspose {

using Face = std::array<int, 3>;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void Extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void Extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Vec3 Extent() const { return max - min; }
  Vec3 Center() const { return 0.5 * (min + max); }
};

/// Triangle mesh in object coordinates (meters). Immutable after
/// construction; normals come from the winding order and point outward on
/// closed meshes.
class TriangleMesh {
 public:
  /// Validates indices and rejects degenerate faces. Closed meshes with
  /// negative signed volume are reoriented so normals point outward.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  double diameter() const { return diameter_; }
  const Aabb& bounds() const { return bounds_; }
  /// Every directed edge has exactly one opposite partner.
  bool is_closed() const { return closed_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Throws kMeshNotClosed unless the mesh can be used for refraction.
  void RequireClosed() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> face_normals_;
  double diameter_ = 0.0;
  Aabb bounds_;
  bool closed_ = false;
  std::vector<std::string> warnings_;
};

/// Reads OBJ or ASCII PLY, chosen by extension.
TriangleMesh LoadMesh(const std::filesystem::path& path);
TriangleMesh ParseObj(const std::string& text);
TriangleMesh ParsePly(const std::string& text);
void SaveObj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Max pairwise vertex distance, O(n^2).
double MaxPairwiseDistance(std::span<const Vec3> points);

// Procedural closed meshes, centered at the origin.
TriangleMesh MakeIcosphere(int subdivisions, double radius);
TriangleMesh MakeBox(const Vec3& size);
/// Axis along z; `segments` sides on the lateral surface.
TriangleMesh MakeCylinder(double radius, double height, int segments);

}  // namespace glasspose
