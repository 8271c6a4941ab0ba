// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cmath>
#include <numbers>

#include "glasspose/compositing.hpp"
#include "glasspose/graycode.hpp"
#include "glasspose/pipeline.hpp"
#include "glasspose/random.hpp"

namespace glasspose {

namespace {

class Checks {
 public:
  void Add(const std::string& name, double value, double expected, double tolerance) {
    const bool ok = std::abs(value - expected) <= tolerance;
    passed_ = passed_ && ok;
    list_.push_back({{"name", name}, {"passed", ok}, {"value", value}, {"expected", expected}, {"tolerance", tolerance}});
  }
  bool passed() const { return passed_; }
  Json ToJson() const { return {{"passed", passed_}, {"checks", list_}}; }

 private:
  bool passed_ = true;
  Json list_ = Json::array();
};

double SnellResidual(CounterRng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 n = UniformUnitVector(rng);
    Vec3 d = UniformUnitVector(rng);
    if (d.dot(n) > 0.0) d = -d;
    const double eta = rng.Uniform(0.5, 1.0);
    const auto t = RefractDirection(d, n, eta);
    if (!t) continue;
    const double sin_i = d.cross(n).norm();
    const double sin_t = t->cross(n).norm();
    worst = std::max(worst, std::abs(sin_t - eta * sin_i));
    worst = std::max(worst, std::abs(t->dot(d.cross(n))));
    worst = std::max(worst, std::abs(t->norm() - 1.0));
  }
  return worst;
}

/// Worst deviation, in pixels, between the rendered flow of the central 5x5
/// pixels and the lateral displacement of a tilted slab.
double SlabResidual(double tilt_deg, int size) {
  const double n = 1.5, h = 0.1, depth = 2.0;
  const TriangleMesh slab = MakeBox({1.0, 1.0, h});
  const double theta = tilt_deg * std::numbers::pi / 180.0;
  Pose pose;
  pose.rotation = RotationFromVector(Vec3(0.0, theta, 0.0));
  pose.translation = Vec3(0.0, 0.0, 1.0);
  const CameraIntrinsics intr{double(size), double(size), 0.5 * (size - 1), 0.5 * (size - 1), size, size};
  RenderConfig cfg;
  cfg.ior = n;
  cfg.background_depth = depth;
  cfg.threads = 1;
  const RfaMaps maps = RenderRfa(slab, pose, intr, cfg);
  const double theta_r = std::asin(std::sin(theta) / n);
  const double shift = h * std::sin(theta - theta_r) / std::cos(theta_r);
  const double expected = intr.fx * shift / depth;
  double worst = 0.0;
  const int c = size / 2;
  for (int v = c - 2; v <= c + 2; ++v) {
    for (int u = c - 2; u <= c + 2; ++u) {
      const std::size_t i = maps.Index(u, v);
      worst = std::max(worst, std::abs(maps.flow[2 * i] - expected));
      worst = std::max(worst, std::abs(maps.flow[2 * i + 1]));
    }
  }
  return worst;
}

}  // namespace

Json RunSelfTest(bool& passed) {
  Checks checks;
  CounterRng rng(20260101);

  checks.Add("fresnel_normal_incidence_ior_1.5", FresnelTransmittance(1.0, 1.0 / 1.5), 0.96, 1e-12);
  checks.Add("snell_random_configurations", SnellResidual(rng), 0.0, 1e-9);
  for (double tilt : {10.0, 30.0, 45.0}) {
    checks.Add("slab_displacement_" + std::to_string(int(tilt)) + "deg", SlabResidual(tilt, 64), 0.0, 0.5);
  }

  int gray_errors = 0;
  for (std::uint32_t v = 0; v < 4096; ++v) {
    const std::uint32_t g = GrayEncode(v);
    if (GrayDecode(g) != v) ++gray_errors;
    if (v > 0 && std::popcount(g ^ GrayEncode(v - 1)) != 1) ++gray_errors;
  }
  checks.Add("gray_code_roundtrip", gray_errors, 0.0, 0.0);

  {
    const TriangleMesh sphere = MakeIcosphere(2, 0.1);
    Pose pose;
    pose.translation = Vec3(0.0, 0.0, 0.6);
    const CameraIntrinsics intr = DefaultIntrinsics(48, 48);
    RenderConfig cfg;
    cfg.ior = 1.0;
    cfg.background_depth = 1.0;
    cfg.threads = 1;
    const RfaMaps maps = RenderRfa(sphere, pose, intr, cfg);
    double max_flow = 0.0, rho_dev = 0.0;
    for (std::size_t i = 0; i < maps.PixelCount(); ++i) {
      if (maps.mask[i] == 0.0) continue;
      max_flow = std::max({max_flow, std::abs(maps.flow[2 * i]), std::abs(maps.flow[2 * i + 1])});
      rho_dev = std::max(rho_dev, std::abs(maps.rho[i] - 1.0));
    }
    checks.Add("index_matched_zero_flow", max_flow, 0.0, 0.0);
    checks.Add("index_matched_unit_rho", rho_dev, 0.0, 0.0);

    Image bg(48, 48, 3);
    for (double& v : bg.data) v = rng.Uniform();
    const Image out = Composite(RfaMaps(48, 48), bg);
    checks.Add("empty_matte_composite_is_background", out == bg ? 0.0 : 1.0, 0.0, 0.0);
  }

  {
    std::vector<Vec3> src, dst;
    Pose truth;
    truth.rotation = UniformRotation(rng);
    truth.translation = Vec3(0.1, -0.2, 0.7);
    for (int i = 0; i < 10; ++i) {
      src.emplace_back(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
      dst.push_back(truth.Apply(src.back()));
    }
    const Pose est = Procrustes(src, dst);
    const double err = std::max((est.rotation - truth.rotation).cwiseAbs().maxCoeff(),
                                (est.translation - truth.translation).cwiseAbs().maxCoeff());
    checks.Add("procrustes_exact_recovery", err, 0.0, 1e-9);
  }

  {
    const TriangleMesh sphere = MakeIcosphere(2, 0.1);
    Pose gt, est;
    gt.translation = Vec3(0.0, 0.0, 0.8);
    est.rotation = UniformRotation(rng);
    est.translation = Vec3(0.01, 0.0, 0.8);
    checks.Add("adds_kdtree_matches_scan",
               AddS(gt, est, sphere.vertices()) - AddSBruteForce(gt, est, sphere.vertices()), 0.0, 1e-9);
  }

  {
    double sum = 0.0;
    const int samples = 20000;
    for (int i = 0; i < samples; ++i) sum += RotationAngle(Mat3::Identity(), UniformRotation(rng));
    const double mean_deg = sum / samples * 180.0 / std::numbers::pi;
    const double expected = (std::numbers::pi / 2.0 + 2.0 / std::numbers::pi) * 180.0 / std::numbers::pi;
    checks.Add("uniform_rotation_mean_angle_deg", mean_deg, expected, 2.0);
  }

  passed = checks.passed();
  return checks.ToJson();
}

}  // namespace glasspose
