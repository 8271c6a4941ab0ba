// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/surface_regions.hpp"

#include <limits>

#include "glasspose/error.hpp"
#include "glasspose/random.hpp"

namespace glasspose {

namespace {

// Index of the largest score; exact ties are broken by the rng.
int PickBest(const std::vector<double>& score, const std::vector<std::uint8_t>& taken,
             CounterRng& rng, bool maximize) {
  std::vector<int> best;
  double best_score = maximize ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(score.size()); ++i) {
    if (taken[i]) continue;
    const double s = score[i];
    const bool better = maximize ? s > best_score : s < best_score;
    if (better) {
      best_score = s;
      best.assign(1, i);
    } else if (s == best_score) {
      best.push_back(i);
    }
  }
  if (best.size() == 1) return best.front();
  return best[rng.UniformIndex(best.size())];
}

}  // namespace

std::vector<int> FarthestPointSampling(std::span<const Vec3> points, int count,
                                       std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (count < 1) Fail(ErrorCode::kInvalidArgument, "farthest_point_sampling: count must be >= 1");
  if (count > n) {
    Fail(ErrorCode::kInvalidArgument, "farthest_point_sampling: count " + std::to_string(count) +
                                          " exceeds point count " + std::to_string(n));
  }
  CounterRng rng(seed, 0x66707300);
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= n;

  std::vector<std::uint8_t> taken(n, 0);
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) score[i] = (points[i] - centroid).squaredNorm();
  std::vector<int> chosen;
  chosen.reserve(count);
  chosen.push_back(PickBest(score, taken, rng, /*maximize=*/false));
  taken[chosen.back()] = 1;

  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(chosen.size()) < count) {
    const Vec3& last = points[chosen.back()];
    for (int i = 0; i < n; ++i) min_dist[i] = std::min(min_dist[i], (points[i] - last).squaredNorm());
    chosen.push_back(PickBest(min_dist, taken, rng, /*maximize=*/true));
    taken[chosen.back()] = 1;
  }
  return chosen;
}

std::vector<Vec3> RegionAnchors(const TriangleMesh& mesh, int count, std::uint64_t seed) {
  std::vector<Vec3> anchors;
  for (int i : FarthestPointSampling(mesh.vertices(), count, seed)) {
    anchors.push_back(mesh.vertices()[i]);
  }
  return anchors;
}

CorrespondenceMap RenderCorrespondence(const SceneRenderer& renderer, const Pose& pose,
                                       const CameraIntrinsics& intr, int threads) {
  std::vector<Vec3> points;
  CorrespondenceMap map;
  renderer.RenderFirstHits(pose, intr, threads, points, map.valid);
  map.width = intr.width;
  map.height = intr.height;
  map.coords.assign(3 * points.size(), 0.0);
  const Aabb& b = renderer.mesh().bounds();
  const Vec3 extent = b.Extent();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!map.valid[i]) continue;
    for (int k = 0; k < 3; ++k) {
      const double c = extent[k] > 0.0 ? (points[i][k] - b.min[k]) / extent[k] : 0.5;
      map.coords[3 * i + k] = std::clamp(c, 0.0, 1.0);
    }
  }
  return map;
}

CorrespondenceMap RenderCorrespondence(const TriangleMesh& mesh, const Pose& pose,
                                       const CameraIntrinsics& intr, int threads) {
  return RenderCorrespondence(SceneRenderer(mesh), pose, intr, threads);
}

RegionMap RegionsFromCorrespondence(const CorrespondenceMap& corr, std::span<const Vec3> anchors,
                                    const Aabb& bounds) {
  if (anchors.empty()) Fail(ErrorCode::kInvalidArgument, "regions: need at least one anchor");
  if (anchors.size() > 65535) Fail(ErrorCode::kInvalidArgument, "regions: too many anchors");
  RegionMap out;
  out.width = corr.width;
  out.height = corr.height;
  out.anchors.assign(anchors.begin(), anchors.end());
  out.labels.assign(corr.valid.size(), 0);
  const Vec3 extent = bounds.Extent();
  for (std::size_t i = 0; i < corr.valid.size(); ++i) {
    if (!corr.valid[i]) continue;
    const Vec3 p(bounds.min.x() + corr.coords[3 * i] * extent.x(),
                 bounds.min.y() + corr.coords[3 * i + 1] * extent.y(),
                 bounds.min.z() + corr.coords[3 * i + 2] * extent.z());
    int best = 0;
    double best_d = (p - anchors[0]).squaredNorm();
    for (std::size_t k = 1; k < anchors.size(); ++k) {
      const double d = (p - anchors[k]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    out.labels[i] = static_cast<std::uint16_t>(best + 1);
  }
  return out;
}

}  // namespace glasspose
