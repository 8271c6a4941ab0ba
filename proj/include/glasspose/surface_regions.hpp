// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glasspose/mesh.hpp"
#include "glasspose/refract_render.hpp"

namespace glasspose {

constexpr int kDefaultRegionCount = 64;

/// Greedy farthest point sampling. Starts at the point nearest the centroid;
/// every next pick maximizes the distance to the chosen set. `seed` only
/// breaks exact ties. Returns indices into `points`.
std::vector<int> FarthestPointSampling(std::span<const Vec3> points, int count,
                                       std::uint64_t seed);

/// Per-pixel visible object-frame coordinates, normalized to [0, 1]^3 by the
/// mesh bounding box.
struct CorrespondenceMap {
  int width = 0;
  int height = 0;
  std::vector<double> coords;  // 3 per pixel
  std::vector<std::uint8_t> valid;
};

struct RegionMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;  // 0 = background, else 1..K
  std::vector<Vec3> anchors;

  int region_count() const { return static_cast<int>(anchors.size()); }
};

CorrespondenceMap RenderCorrespondence(const SceneRenderer& renderer, const Pose& pose,
                                       const CameraIntrinsics& intr, int threads = 0);
CorrespondenceMap RenderCorrespondence(const TriangleMesh& mesh, const Pose& pose,
                                       const CameraIntrinsics& intr, int threads = 0);

/// Labels each valid pixel with 1 + index of the nearest anchor (object
/// frame); ties go to the lowest index.
RegionMap RegionsFromCorrespondence(const CorrespondenceMap& corr, std::span<const Vec3> anchors,
                                    const Aabb& bounds);

/// FPS anchors on the mesh vertices.
std::vector<Vec3> RegionAnchors(const TriangleMesh& mesh, int count, std::uint64_t seed);

}  // namespace glasspose
