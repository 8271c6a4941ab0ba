// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/refract_render.hpp"

#include <algorithm>
#include <cmath>

#include "glasspose/error.hpp"
#include "glasspose/parallel.hpp"

namespace glasspose {

std::string ToString(TirPolicy policy) {
  return policy == TirPolicy::kReflect ? "reflect" : "terminate";
}

TirPolicy TirPolicyFromString(const std::string& name) {
  if (name == "terminate") return TirPolicy::kTerminate;
  if (name == "reflect") return TirPolicy::kReflect;
  Fail(ErrorCode::kInvalidArgument, "unknown tir_policy '" + name + "' (terminate|reflect)");
}

void RenderConfig::Validate() const {
  if (!(ior >= 1.0) || !std::isfinite(ior)) {
    Fail(ErrorCode::kInvalidArgument, "render: ior must be >= 1");
  }
  if (!(background_depth > 0.0) || !std::isfinite(background_depth)) {
    Fail(ErrorCode::kInvalidArgument, "render: background_depth must be positive");
  }
  if (max_bounces < 2) Fail(ErrorCode::kInvalidArgument, "render: max_bounces must be >= 2");
  if (threads < 0) Fail(ErrorCode::kInvalidArgument, "render: threads must be >= 0");
}

std::optional<Vec3> RefractDirection(const Vec3& incident, const Vec3& normal, double eta) {
  if (eta == 1.0) return incident;
  const double cos_i = -normal.dot(incident);
  const double sin2_t = eta * eta * std::max(0.0, 1.0 - cos_i * cos_i);
  if (sin2_t > 1.0) return std::nullopt;
  const double cos_t = std::sqrt(1.0 - sin2_t);
  return eta * incident + (eta * cos_i - cos_t) * normal;
}

Vec3 ReflectDirection(const Vec3& incident, const Vec3& normal) {
  return incident - 2.0 * incident.dot(normal) * normal;
}

double FresnelTransmittance(double cos_incident, double eta) {
  if (eta == 1.0) return 1.0;
  const double cos_i = std::clamp(cos_incident, 0.0, 1.0);
  const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
  if (sin2_t >= 1.0) return 0.0;
  const double cos_t = std::sqrt(1.0 - sin2_t);
  const double rs = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
  const double rp = (eta * cos_t - cos_i) / (eta * cos_t + cos_i);
  return std::clamp(1.0 - 0.5 * (rs * rs + rp * rp), 0.0, 1.0);
}

namespace {

enum class PathOutcome { kMiss, kExit, kTir, kBounceLimit, kLeaked, kInvalidExit };

struct PathResult {
  PathOutcome outcome = PathOutcome::kMiss;
  double rho = 0.0;
  Vec2 flow = Vec2::Zero();
};

}  // namespace

SceneRenderer::SceneRenderer(const TriangleMesh& mesh) : mesh_(&mesh), bvh_(mesh) {}

SceneRenderer::PixelRect SceneRenderer::Footprint(const Pose& pose,
                                                  const CameraIntrinsics& intr) const {
  const Aabb& b = mesh_->bounds();
  double umin = INFINITY, vmin = INFINITY, umax = -INFINITY, vmax = -INFINITY;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner((i & 1) ? b.max.x() : b.min.x(), (i & 2) ? b.max.y() : b.min.y(),
                      (i & 4) ? b.max.z() : b.min.z());
    const Vec3 c = pose.Apply(corner);
    if (!(c.z() > 0.0)) return {0, 0, intr.width, intr.height};
    const Vec2 p = Project(intr, c);
    umin = std::min(umin, p.x());
    umax = std::max(umax, p.x());
    vmin = std::min(vmin, p.y());
    vmax = std::max(vmax, p.y());
  }
  auto clamp_lo = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::floor(v) - 1.0, 0.0, double(hi)));
  };
  auto clamp_hi = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::ceil(v) + 2.0, 0.0, double(hi)));
  };
  return {clamp_lo(umin, intr.width), clamp_lo(vmin, intr.height), clamp_hi(umax, intr.width),
          clamp_hi(vmax, intr.height)};
}

RfaMaps SceneRenderer::RenderRfa(const Pose& pose, const CameraIntrinsics& intr,
                                 const RenderConfig& cfg, RenderDiagnostics* diagnostics) const {
  intr.Validate();
  cfg.Validate();
  mesh_->RequireClosed();
  if (!pose.IsValid(1e-6)) Fail(ErrorCode::kInvalidArgument, "render: pose rotation is not orthonormal");
  double far_z = -INFINITY;
  for (const Vec3& v : mesh_->vertices()) far_z = std::max(far_z, pose.Apply(v).z());
  if (far_z >= cfg.background_depth) {
    Fail(ErrorCode::kInvalidArgument, "render: background plane must lie beyond the object's far extent");
  }

  RfaMaps maps(intr.width, intr.height);
  const PixelRect roi = Footprint(pose, intr);
  const Mat3 rt = pose.rotation.transpose();
  const Vec3 origin_local = -(rt * pose.translation);
  const double eps = 1e-9 * mesh_->diameter();
  const double ior = cfg.ior;

  auto trace = [&](int u, int v) {
    PathResult result;
    const Ray primary = PixelRay(intr, u, v);
    Ray ray{origin_local, rt * primary.direction};
    auto hit = bvh_.Intersect(ray);
    if (!hit) return result;

    double rho = 1.0;
    bool inside = false;
    bool bent = false;
    int events = 0;
    while (hit) {
      if (++events > cfg.max_bounces) {
        result.outcome = PathOutcome::kBounceLimit;
        return result;
      }
      const bool entering = hit->entering;
      const Vec3 facing = entering ? hit->normal : Vec3(-hit->normal);
      const double eta = entering ? 1.0 / ior : ior;
      const double cos_i = -facing.dot(ray.direction);
      Vec3 next_dir;
      if (auto refracted = RefractDirection(ray.direction, facing, eta)) {
        rho *= FresnelTransmittance(cos_i, eta);
        next_dir = *refracted;
        inside = entering;
        bent = bent || eta != 1.0;
      } else {
        if (cfg.tir_policy == TirPolicy::kTerminate) {
          result.outcome = PathOutcome::kTir;
          return result;
        }
        next_dir = ReflectDirection(ray.direction, facing);
        bent = true;
      }
      ray = Ray{hit->point, next_dir};
      hit = bvh_.Intersect(ray, eps, INFINITY, hit->face);
    }
    if (inside) {
      result.outcome = PathOutcome::kLeaked;
      return result;
    }
    result.rho = rho;
    result.outcome = PathOutcome::kExit;
    if (!bent) return result;

    const Vec3 origin_cam = pose.Apply(ray.origin);
    const Vec3 dir_cam = pose.rotation * ray.direction;
    const double travel = (cfg.background_depth - origin_cam.z()) / dir_cam.z();
    if (!(dir_cam.z() > 1e-12) || !(travel >= 0.0) || !std::isfinite(travel)) {
      result.outcome = PathOutcome::kInvalidExit;
      result.rho = 0.0;
      return result;
    }
    const Vec2 landed = Project(intr, origin_cam + travel * dir_cam);
    result.flow = landed - Vec2(u, v);
    if (!result.flow.allFinite()) {
      result.outcome = PathOutcome::kInvalidExit;
      result.rho = 0.0;
      result.flow.setZero();
    }
    return result;
  };

  const int rows = std::max(0, roi.y1 - roi.y0);
  std::vector<RenderDiagnostics> per_row(rows);
  const int threads = cfg.threads > 0 ? cfg.threads : DefaultThreads();
  ParallelFor(rows, threads, [&](int r) {
    const int y = roi.y0 + r;
    RenderDiagnostics& diag = per_row[r];
    for (int x = roi.x0; x < roi.x1; ++x) {
      const PathResult res = trace(x, y);
      if (res.outcome == PathOutcome::kMiss) continue;
      const std::size_t i = maps.Index(x, y);
      maps.mask[i] = 1.0;
      ++diag.mask_pixels;
      switch (res.outcome) {
        case PathOutcome::kExit:
          maps.rho[i] = res.rho;
          maps.flow[2 * i] = res.flow.x();
          maps.flow[2 * i + 1] = res.flow.y();
          break;
        case PathOutcome::kTir: ++diag.total_internal_reflection; break;
        case PathOutcome::kBounceLimit: ++diag.bounce_limit; break;
        case PathOutcome::kLeaked: ++diag.leaked; break;
        case PathOutcome::kInvalidExit: ++diag.invalid_exit; break;
        case PathOutcome::kMiss: break;
      }
    }
  });
  if (diagnostics) {
    *diagnostics = {};
    for (const RenderDiagnostics& d : per_row) {
      diagnostics->invalid_exit += d.invalid_exit;
      diagnostics->total_internal_reflection += d.total_internal_reflection;
      diagnostics->bounce_limit += d.bounce_limit;
      diagnostics->leaked += d.leaked;
      diagnostics->mask_pixels += d.mask_pixels;
    }
  }
  return maps;
}

std::vector<double> SceneRenderer::RenderDepth(const Pose& pose, const CameraIntrinsics& intr,
                                               int threads) const {
  intr.Validate();
  std::vector<double> depth(std::size_t(intr.width) * intr.height, 0.0);
  const PixelRect roi = Footprint(pose, intr);
  const int rows = std::max(0, roi.y1 - roi.y0);
  ParallelFor(rows, threads > 0 ? threads : DefaultThreads(), [&](int r) {
    const int y = roi.y0 + r;
    for (int x = roi.x0; x < roi.x1; ++x) {
      const Ray ray = PixelRay(intr, x, y);
      if (auto hit = RayMeshIntersect(ray, bvh_, pose)) {
        depth[std::size_t(y) * intr.width + x] = hit->point.z();
      }
    }
  });
  return depth;
}

void SceneRenderer::RenderFirstHits(const Pose& pose, const CameraIntrinsics& intr, int threads,
                                    std::vector<Vec3>& points,
                                    std::vector<std::uint8_t>& valid) const {
  intr.Validate();
  const std::size_t n = std::size_t(intr.width) * intr.height;
  points.assign(n, Vec3::Zero());
  valid.assign(n, 0);
  const PixelRect roi = Footprint(pose, intr);
  const Mat3 rt = pose.rotation.transpose();
  const Vec3 origin_local = -(rt * pose.translation);
  const int rows = std::max(0, roi.y1 - roi.y0);
  ParallelFor(rows, threads > 0 ? threads : DefaultThreads(), [&](int r) {
    const int y = roi.y0 + r;
    for (int x = roi.x0; x < roi.x1; ++x) {
      const Ray ray{origin_local, rt * PixelRay(intr, x, y).direction};
      if (auto hit = bvh_.Intersect(ray)) {
        const std::size_t i = std::size_t(y) * intr.width + x;
        points[i] = hit->point;
        valid[i] = 1;
      }
    }
  });
}

RfaMaps RenderRfa(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& intr,
                  const RenderConfig& cfg, RenderDiagnostics* diagnostics) {
  mesh.RequireClosed();
  return SceneRenderer(mesh).RenderRfa(pose, intr, cfg, diagnostics);
}

std::vector<double> RenderDepth(const TriangleMesh& mesh, const Pose& pose,
                                const CameraIntrinsics& intr, int threads) {
  return SceneRenderer(mesh).RenderDepth(pose, intr, threads);
}

double SuggestBackgroundDepth(const TriangleMesh& mesh, const Pose& pose) {
  double far_z = -INFINITY;
  for (const Vec3& v : mesh.vertices()) far_z = std::max(far_z, pose.Apply(v).z());
  return std::max(far_z, 0.0) + mesh.diameter();
}

}  // namespace glasspose
