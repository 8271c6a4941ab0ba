// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "glasspose/mesh.hpp"

namespace glasspose {

struct Hit {
  double t = 0.0;
  Vec3 point;
  Vec3 normal;   // outward geometric normal of the hit face
  int face = -1;
  bool entering = false;  // ray direction opposes the outward normal
};

/// Watertight ray/triangle test (Woop, Benthin, Wald 2013). Returns the ray
/// parameter on hit.
std::optional<double> IntersectTriangle(const Ray& ray, const Vec3& a,
                                        const Vec3& b, const Vec3& c);

/// Axis-aligned BVH over a mesh with deterministic median splits. The mesh
/// must outlive the BVH.
class Bvh {
 public:
  explicit Bvh(const TriangleMesh& mesh);

  /// Nearest hit with t in (t_min, t_max), skipping `skip_face`. Equal-t ties
  /// resolve to the lowest face index.
  std::optional<Hit> Intersect(const Ray& ray, double t_min = 0.0,
                               double t_max = std::numeric_limits<double>::infinity(),
                               int skip_face = -1) const;

  const TriangleMesh& mesh() const { return *mesh_; }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first index into order_; inner: right child
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t Build(std::uint32_t begin, std::uint32_t end);

  const TriangleMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
};

/// Reference nearest-hit scan over all triangles; same tie rule as Bvh.
std::optional<Hit> IntersectBruteForce(const TriangleMesh& mesh, const Ray& ray,
                                       double t_min = 0.0,
                                       double t_max = std::numeric_limits<double>::infinity(),
                                       int skip_face = -1);

/// Nearest hit of a camera-frame ray with the posed mesh. The returned point
/// and normal are in camera frame.
std::optional<Hit> RayMeshIntersect(const Ray& ray, const Bvh& bvh, const Pose& pose);

}  // namespace glasspose
