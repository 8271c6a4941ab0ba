// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "glasspose/bvh.hpp"
#include "glasspose/error.hpp"
#include "glasspose/refract_render.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace glasspose;

namespace {

struct OraclePixel {
  bool mask = false;
  double rho = 0.0;
  Vec2 flow = Vec2::Zero();
};

// Camera-frame tracer over a pre-transformed copy of the mesh using the
// brute-force intersector and angle-based refraction.
OraclePixel TraceOracle(const TriangleMesh& cam_mesh, const CameraIntrinsics& intr, double ior,
                        double depth, int u, int v) {
  OraclePixel out;
  Ray ray = PixelRay(intr, u, v);
  auto hit = IntersectBruteForce(cam_mesh, ray);
  if (!hit) return out;
  out.mask = true;
  double rho = 1.0;
  bool inside = false;
  for (int events = 0; hit; ++events) {
    if (events >= 8) return out;
    const double n1 = hit->entering ? 1.0 : ior;
    const double n2 = hit->entering ? ior : 1.0;
    const Vec3 n = hit->entering ? hit->normal : Vec3(-hit->normal);
    const double cos_i = -n.dot(ray.direction);
    const double sin_i = std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i));
    const double sin_t = n1 / n2 * sin_i;
    if (sin_t > 1.0) return out;
    // Decompose into normal and tangential parts and rebuild with the
    // refracted angle.
    const Vec3 tangent_part = ray.direction + cos_i * n;
    const Vec3 tangent = tangent_part.norm() > 0 ? Vec3(tangent_part.normalized()) : Vec3::Zero();
    const Vec3 dir = (sin_t * tangent - std::sqrt(1.0 - sin_t * sin_t) * n).normalized();
    rho *= oracles::Fresnel(n1, n2, cos_i);
    inside = hit->entering;
    ray = {hit->point, dir};
    hit = IntersectBruteForce(cam_mesh, ray, 1e-9, INFINITY, hit->face);
  }
  if (inside) return out;
  const double travel = (depth - ray.origin.z()) / ray.direction.z();
  const Vec3 land = ray.origin + travel * ray.direction;
  out.rho = rho;
  out.flow = Vec2(intr.fx * land.x() / land.z() + intr.cx - u, intr.fy * land.y() / land.z() + intr.cy - v);
  return out;
}

TriangleMesh Posed(const TriangleMesh& mesh, const Pose& pose) {
  return TriangleMesh(TransformPoints(pose, mesh.vertices()), mesh.faces());
}

}  // namespace

TEST_CASE("refraction obeys snell's law on random configurations") {
  CounterRng rng(21);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 n = UniformUnitVector(rng);
    Vec3 d = UniformUnitVector(rng);
    if (d.dot(n) > 0) d = -d;
    const bool into_glass = i % 2 == 0;
    const double eta = into_glass ? 1.0 / 1.5 : 1.5;
    const double theta_i = std::acos(std::min(1.0, -d.dot(n)));
    const auto t = RefractDirection(d, n, eta);
    if (eta * std::sin(theta_i) > 1.0) {
      CHECK_FALSE(t.has_value());
      continue;
    }
    REQUIRE(t.has_value());
    ++checked;
    const double theta_t = std::asin(eta * std::sin(theta_i));
    CHECK(std::abs(std::acos(std::clamp(-t->dot(n), -1.0, 1.0)) - theta_t) < 1e-7);
    CHECK(std::abs(t->cross(n).norm() - eta * d.cross(n).norm()) < 1e-9);
    CHECK(std::abs(t->dot(d.cross(n))) < 1e-9);
    CHECK(std::abs(t->norm() - 1.0) < 1e-12);
  }
  CHECK(checked > 550);
}

TEST_CASE("fresnel transmittance values") {
  CHECK(std::abs(FresnelTransmittance(1.0, 1.0 / 1.5) - 0.96) < 1e-12);
  CHECK(std::abs(FresnelTransmittance(1.0, 1.5) - 0.96) < 1e-12);
  CHECK(FresnelTransmittance(0.3, 1.0) == 1.0);
  CHECK(FresnelTransmittance(0.1, 1.5) == 0.0);
  CounterRng rng(22);
  for (int i = 0; i < 200; ++i) {
    const double c = rng.Uniform(0.01, 1.0);
    CHECK(std::abs(FresnelTransmittance(c, 1.0 / 1.5) - oracles::Fresnel(1.0, 1.5, c)) < 1e-12);
    CHECK(std::abs(FresnelTransmittance(c, 1.5) - oracles::Fresnel(1.5, 1.0, c)) < 1e-12);
  }
  CHECK(FresnelTransmittance(1e-9, 1.0 / 1.5) < 1e-6);
}

TEST_CASE("index matched object gives zero flow and unit attenuation") {
  const TriangleMesh sphere = MakeIcosphere(2, 0.1);
  Pose pose;
  pose.translation = Vec3(0.01, -0.02, 0.7);
  RenderConfig cfg;
  cfg.ior = 1.0;
  cfg.background_depth = 1.5;
  const RfaMaps m = RenderRfa(sphere, pose, testing::SquareCamera(64, 80), cfg);
  double covered = 0;
  for (std::size_t i = 0; i < m.PixelCount(); ++i) {
    covered += m.mask[i];
    CHECK(m.flow[2 * i] == 0.0);
    CHECK(m.flow[2 * i + 1] == 0.0);
    CHECK(m.rho[i] == m.mask[i]);
  }
  CHECK(covered > 100);
}

TEST_CASE("tilted slab displacement matches the lateral shift formula") {
  const double n = 1.5, h = 0.1, depth = 2.0;
  const TriangleMesh slab = MakeBox({1.0, 1.0, h});
  const CameraIntrinsics intr = testing::SquareCamera(256, 256);
  for (double deg : {10.0, 30.0, 45.0}) {
    const double theta = deg * M_PI / 180.0;
    Pose pose;
    pose.rotation = RotationFromVector(Vec3(0, theta, 0));
    pose.translation = Vec3(0, 0, 1);
    RenderConfig cfg;
    cfg.ior = n;
    cfg.background_depth = depth;
    const RfaMaps m = RenderRfa(slab, pose, intr, cfg);
    const double theta_r = std::asin(std::sin(theta) / n);
    const double expected = intr.fx * h * std::sin(theta - theta_r) / std::cos(theta_r) / depth;
    for (int v = 125; v <= 129; ++v) {
      for (int u = 125; u <= 129; ++u) {
        const std::size_t i = m.Index(u, v);
        CHECK(m.mask[i] == 1.0);
        CHECK(std::abs(m.flow[2 * i] - expected) < 0.5);
        CHECK(std::abs(m.flow[2 * i + 1]) < 0.5);
        const double cos_i = std::abs(PixelRay(intr, u, v).direction.dot(pose.rotation.col(2)));
        const double cos_t = std::sqrt(1.0 - (1.0 - cos_i * cos_i) / (n * n));
        CHECK(std::abs(m.rho[i] - oracles::Fresnel(1.0, n, cos_i) * oracles::Fresnel(n, 1.0, cos_t)) < 1e-9);
      }
    }
  }
}

TEST_CASE("renderer agrees with an independent camera-frame tracer") {
  CounterRng rng(23);
  const CameraIntrinsics intr = testing::SquareCamera(48, 60);
  for (const TriangleMesh& mesh : {MakeIcosphere(1, 0.1), MakeBox({0.2, 0.12, 0.08}), MakeCylinder(0.05, 0.16, 16)}) {
    const Pose pose = testing::RandomPose(rng, 0.6);
    RenderConfig cfg;
    cfg.background_depth = SuggestBackgroundDepth(mesh, pose);
    const RfaMaps m = RenderRfa(mesh, pose, intr, cfg);
    const TriangleMesh cam = Posed(mesh, pose);
    int agree = 0, total = 0;
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        const OraclePixel o = TraceOracle(cam, intr, cfg.ior, cfg.background_depth, u, v);
        const std::size_t i = m.Index(u, v);
        CHECK((m.mask[i] == 1.0) == o.mask);
        if (!o.mask) continue;
        ++total;
        if (std::abs(m.flow[2 * i] - o.flow.x()) < 1e-6 && std::abs(m.flow[2 * i + 1] - o.flow.y()) < 1e-6 &&
            std::abs(m.rho[i] - o.rho) < 1e-9) {
          ++agree;
        }
      }
    }
    CHECK(total > 100);
    CHECK(agree >= total - total / 100);
  }
}

TEST_CASE("region of interest rendering equals full frame tracing") {
  // With the object partly outside the frame and near the border the
  // footprint logic is exercised; a renderer over a camera with a shifted
  // principal point sees the same rays for the overlapping pixels.
  CounterRng rng(24);
  const TriangleMesh mesh = MakeBox({0.2, 0.1, 0.15});
  const CameraIntrinsics big{100, 100, 50, 50, 100, 100};
  for (int i = 0; i < 5; ++i) {
    const Pose pose = testing::RandomPose(rng, 0.5, 0.2);
    RenderConfig cfg;
    cfg.background_depth = 1.2;
    const RfaMaps full = RenderRfa(mesh, pose, big, cfg);
    const CameraIntrinsics crop{100, 100, 50 - 20, 50 - 30, 40, 30};
    const RfaMaps part = RenderRfa(mesh, pose, crop, cfg);
    for (int v = 0; v < 30; ++v) {
      for (int u = 0; u < 40; ++u) {
        const std::size_t a = part.Index(u, v), b = full.Index(u + 20, v + 30);
        CHECK(part.mask[a] == full.mask[b]);
        CHECK(std::abs(part.rho[a] - full.rho[b]) < 1e-12);
        CHECK(std::abs(part.flow[2 * a] - full.flow[2 * b]) < 1e-9);
        CHECK(std::abs(part.flow[2 * a + 1] - full.flow[2 * b + 1]) < 1e-9);
      }
    }
  }
}

TEST_CASE("render is bit identical across thread counts") {
  const TriangleMesh mesh = MakeIcosphere(2, 0.1);
  CounterRng rng(25);
  const Pose pose = testing::RandomPose(rng, 0.7);
  RenderConfig cfg;
  cfg.background_depth = 1.2;
  cfg.threads = 1;
  RenderDiagnostics d1, d8;
  const RfaMaps a = RenderRfa(mesh, pose, testing::SquareCamera(64, 80), cfg, &d1);
  cfg.threads = 8;
  const RfaMaps b = RenderRfa(mesh, pose, testing::SquareCamera(64, 80), cfg, &d8);
  CHECK(a == b);
  CHECK(d1.mask_pixels == d8.mask_pixels);
}

TEST_CASE("total internal reflection policies") {
  // A cube seen at a steep tilt produces rays that hit the exit faces beyond
  // the critical angle.
  const TriangleMesh cube = MakeBox({0.2, 0.2, 0.2});
  Pose pose;
  pose.rotation = RotationFromVector(Vec3(0.6, 0.7, 0.2));
  pose.translation = Vec3(0, 0, 0.8);
  RenderConfig cfg;
  cfg.background_depth = 2.0;
  RenderDiagnostics term, refl;
  const RfaMaps a = RenderRfa(cube, pose, testing::SquareCamera(64, 100), cfg, &term);
  CHECK(term.total_internal_reflection > 0);
  for (std::size_t i = 0; i < a.PixelCount(); ++i) {
    if (a.mask[i] == 1.0 && a.rho[i] == 0.0) {
      CHECK(a.flow[2 * i] == 0.0);
      CHECK(a.flow[2 * i + 1] == 0.0);
    }
  }
  cfg.tir_policy = TirPolicy::kReflect;
  const RfaMaps b = RenderRfa(cube, pose, testing::SquareCamera(64, 100), cfg, &refl);
  CHECK(refl.total_internal_reflection == 0);
  CHECK(a.mask == b.mask);
  double lit_a = 0, lit_b = 0;
  for (std::size_t i = 0; i < a.PixelCount(); ++i) {
    lit_a += a.rho[i] > 0;
    lit_b += b.rho[i] > 0;
  }
  CHECK(lit_b > lit_a);
  CHECK(TirPolicyFromString(ToString(TirPolicy::kReflect)) == TirPolicy::kReflect);
  CHECK_THROWS_AS(TirPolicyFromString("bounce"), Error);
}

TEST_CASE("object behind the camera renders empty maps") {
  const TriangleMesh sphere = MakeIcosphere(1, 0.1);
  Pose pose;
  pose.translation = Vec3(0, 0, -1);
  RenderConfig cfg;
  cfg.background_depth = SuggestBackgroundDepth(sphere, pose);
  RenderDiagnostics d;
  const RfaMaps m = RenderRfa(sphere, pose, testing::SquareCamera(32, 40), cfg, &d);
  CHECK(d.mask_pixels == 0);
  CHECK(m == RfaMaps(32, 32));
}

TEST_CASE("invalid render inputs are rejected") {
  const TriangleMesh sphere = MakeIcosphere(1, 0.1);
  Pose pose;
  pose.translation = Vec3(0, 0, 1);
  RenderConfig cfg;
  cfg.background_depth = 1.05;
  CHECK_THROWS_AS(RenderRfa(sphere, pose, testing::SquareCamera(16, 20), cfg), Error);
  cfg.background_depth = 2.0;
  cfg.ior = 0.9;
  CHECK_THROWS_AS(RenderRfa(sphere, pose, testing::SquareCamera(16, 20), cfg), Error);
  cfg.ior = 1.5;
  const TriangleMesh open(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, 2}});
  CHECK_THROWS_AS(RenderRfa(open, pose, testing::SquareCamera(16, 20), cfg), Error);
  Pose skew = pose;
  skew.rotation(0, 1) = 0.3;
  CHECK_THROWS_AS(RenderRfa(sphere, skew, testing::SquareCamera(16, 20), cfg), Error);
}

TEST_CASE("depth render matches first hits") {
  const TriangleMesh box = MakeBox({0.2, 0.2, 0.2});
  Pose pose;
  pose.translation = Vec3(0, 0, 1);
  const auto depth = RenderDepth(box, pose, testing::SquareCamera(31, 100));
  CHECK(std::abs(depth[15 * 31 + 15] - 0.9) < 1e-12);
  CHECK(depth[0] == 0.0);
}
