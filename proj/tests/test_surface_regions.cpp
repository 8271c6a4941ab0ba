// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>

#include "glasspose/error.hpp"
#include "glasspose/surface_regions.hpp"
#include "test_util.hpp"

using namespace glasspose;

namespace {

double MinDistanceTo(const Vec3& p, std::span<const Vec3> set) {
  double best = INFINITY;
  for (const Vec3& q : set) best = std::min(best, (p - q).norm());
  return best;
}

}  // namespace

TEST_CASE("farthest point sampling basics") {
  const std::vector<Vec3> line{{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}, {0.3, 0, 0}};
  const auto one = FarthestPointSampling(line, 1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 1);  // centroid at x = 0.45

  const std::vector<Vec3> segment{{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}};
  const auto two = FarthestPointSampling(segment, 2, 0);
  // Brute force over all pairs for the one with the largest separation.
  double best = -1;
  std::pair<int, int> best_pair;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double d = (segment[i] - segment[j]).norm();
      if (d > best) best = d, best_pair = {i, j};
    }
  }
  // Starting at the midpoint, the second pick is an endpoint; the first pick
  // is the point nearest the centroid.
  CHECK(two[0] == 1);
  CHECK((two[1] == best_pair.first || two[1] == best_pair.second));

  CHECK_THROWS_AS(FarthestPointSampling(segment, 4, 0), Error);
  CHECK_THROWS_AS(FarthestPointSampling(segment, 0, 0), Error);
}

TEST_CASE("farthest point sampling picks the maximin point each step") {
  CounterRng rng(51);
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) pts.emplace_back(rng.Uniform(), rng.Uniform(), rng.Uniform());
  const auto picks = FarthestPointSampling(pts, 400, 9);
  std::vector<int> sorted = picks;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 400; ++i) CHECK(sorted[i] == i);
  std::vector<Vec3> chosen{pts[picks[0]]};
  double prev_gap = INFINITY;
  for (std::size_t k = 1; k < 50; ++k) {
    double best = -1;
    for (const Vec3& p : pts) best = std::max(best, MinDistanceTo(p, chosen));
    const double gap = MinDistanceTo(pts[picks[k]], chosen);
    CHECK(gap == best);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
    chosen.push_back(pts[picks[k]]);
  }
  CHECK(FarthestPointSampling(pts, 50, 9) == std::vector<int>(picks.begin(), picks.begin() + 50));
}

TEST_CASE("correspondence of a cube face is constant on the facing axis") {
  const TriangleMesh cube = MakeBox({0.2, 0.2, 0.2});
  Pose pose;
  pose.translation = Vec3(0, 0, 1);
  const CameraIntrinsics intr = testing::SquareCamera(41, 100);
  const CorrespondenceMap corr = RenderCorrespondence(cube, pose, intr);
  CHECK(corr.valid[0] == 0);
  int valid = 0;
  for (std::size_t i = 0; i < corr.valid.size(); ++i) {
    if (!corr.valid[i]) continue;
    ++valid;
    CHECK(std::abs(corr.coords[3 * i + 2]) < 1e-12);
  }
  CHECK(valid > 50);
}

TEST_CASE("de-normalized correspondences reproject onto their pixel") {
  CounterRng rng(52);
  const TriangleMesh mesh = MakeCylinder(0.05, 0.15, 24);
  const Pose pose = testing::RandomPose(rng, 0.6);
  const CameraIntrinsics intr = testing::SquareCamera(64, 90);
  const CorrespondenceMap corr = RenderCorrespondence(mesh, pose, intr);
  const Aabb& b = mesh.bounds();
  int valid = 0;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const std::size_t i = std::size_t(v) * intr.width + u;
      if (!corr.valid[i]) continue;
      ++valid;
      const Vec3 obj = b.min + Vec3(corr.coords[3 * i], corr.coords[3 * i + 1], corr.coords[3 * i + 2])
                                   .cwiseProduct(b.Extent());
      const Vec2 uv = Project(intr, pose.Apply(obj));
      CHECK(std::abs(uv.x() - u) < 0.5);
      CHECK(std::abs(uv.y() - v) < 0.5);
    }
  }
  CHECK(valid > 100);
}

TEST_CASE("region labels equal a nearest-anchor scan and cover the mask") {
  CounterRng rng(53);
  const TriangleMesh mesh = MakeIcosphere(3, 0.1);
  const Pose pose = testing::RandomPose(rng, 0.5);
  const CameraIntrinsics intr = testing::SquareCamera(64, 90);
  const CorrespondenceMap corr = RenderCorrespondence(mesh, pose, intr);
  const auto anchors = RegionAnchors(mesh, 16, 3);
  CHECK(anchors == RegionAnchors(mesh, 16, 3));
  const RegionMap regions = RegionsFromCorrespondence(corr, anchors, mesh.bounds());
  const Aabb& b = mesh.bounds();
  for (std::size_t i = 0; i < corr.valid.size(); ++i) {
    if (!corr.valid[i]) {
      CHECK(regions.labels[i] == 0);
      continue;
    }
    const Vec3 p = b.min + Vec3(corr.coords[3 * i], corr.coords[3 * i + 1], corr.coords[3 * i + 2])
                               .cwiseProduct(b.Extent());
    int best = 0;
    for (int k = 1; k < 16; ++k) {
      if ((p - anchors[k]).norm() < (p - anchors[best]).norm()) best = k;
    }
    CHECK(regions.labels[i] == best + 1);
  }

  const RegionMap single = RegionsFromCorrespondence(corr, std::span(anchors).first(1), mesh.bounds());
  for (std::size_t i = 0; i < corr.valid.size(); ++i) CHECK(single.labels[i] == corr.valid[i]);
}

TEST_CASE("pixel exactly on an anchor takes that anchor's label") {
  CorrespondenceMap corr;
  corr.width = 2;
  corr.height = 1;
  corr.coords = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  corr.valid = {1, 1};
  Aabb box;
  box.min = Vec3(-1, -1, -1);
  box.max = Vec3(1, 1, 1);
  const std::vector<Vec3> anchors{{0, 0, 0}, {1, 1, 1}, {-1, -1, -1}};
  const RegionMap r = RegionsFromCorrespondence(corr, anchors, box);
  CHECK(r.labels[0] == 3);
  CHECK(r.labels[1] == 2);
}

TEST_CASE("symmetrized anchors give a rotation invariant region histogram") {
  const int folds = 8;
  const TriangleMesh mesh = MakeCylinder(0.06, 0.12, folds);
  std::vector<Vec3> anchors;
  // One orbit on each rim and one around the middle of the side wall.
  const std::vector<Vec3> seeds{{0.06, 0.0, 0.06}, {0.03, 0.02, -0.06}, {0.05, 0.01, 0.0}};
  for (const Vec3& seed_anchor : seeds) {
    for (int k = 0; k < folds; ++k) {
      anchors.push_back(RotationFromVector(Vec3(0, 0, 2 * M_PI * k / folds)) * seed_anchor);
    }
  }
  Pose pose;
  pose.rotation = RotationFromVector(Vec3(0.9, 0.3, 0.1));
  pose.translation = Vec3(0.01, 0, 0.6);
  Pose turned = pose;
  turned.rotation = pose.rotation * RotationFromVector(Vec3(0, 0, 2 * M_PI / folds));
  const CameraIntrinsics intr = testing::SquareCamera(96, 150);
  auto histogram = [&](const Pose& p) {
    const RegionMap r = RegionsFromCorrespondence(RenderCorrespondence(mesh, p, intr), anchors, mesh.bounds());
    std::vector<int> counts(anchors.size() + 1, 0);
    for (auto l : r.labels) ++counts[l];
    return counts;
  };
  const auto h0 = histogram(pose), h1 = histogram(turned);
  CHECK(h0[0] < int(intr.width * intr.height));
  const int mask_pixels = int(intr.width * intr.height) - h0[0];
  // Rotating by one fold shifts each orbit by one position.
  int diff = 0;
  for (std::size_t orbit = 0; orbit < 3; ++orbit) {
    for (int k = 0; k < folds; ++k) {
      const std::size_t a = 1 + orbit * folds + k, b = 1 + orbit * folds + (k + folds - 1) % folds;
      diff += std::abs(h0[a] - h1[b]);
    }
  }
  CHECK(diff <= 0.02 * mask_pixels);
}
