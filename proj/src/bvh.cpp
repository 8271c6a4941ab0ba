// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glasspose {

namespace {

constexpr std::uint32_t kLeafSize = 4;

bool Closer(double t, int face, double best_t, int best_face) {
  return t < best_t || (t == best_t && face < best_face);
}

Hit MakeHit(const TriangleMesh& mesh, const Ray& ray, double t, int face) {
  Hit hit;
  hit.t = t;
  hit.face = face;
  hit.point = ray.origin + t * ray.direction;
  hit.normal = mesh.face_normals()[face];
  hit.entering = ray.direction.dot(hit.normal) < 0.0;
  return hit;
}

// Slab test against [t_min, t_max]; `entry` receives the clipped entry
// parameter on overlap.
bool BoxOverlaps(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_min,
                double t_max, double* entry = nullptr) {
  double lo = t_min;
  double hi = t_max;
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min[k] - origin[k]) * inv_dir[k];
    double t1 = (box.max[k] - origin[k]) * inv_dir[k];
    if (std::isnan(t0) || std::isnan(t1)) {
      // Ray parallel to and on the slab plane.
      if (origin[k] < box.min[k] || origin[k] > box.max[k]) return false;
      continue;
    }
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1 * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()));
    if (lo > hi) return false;
  }
  if (entry) *entry = lo;
  return true;
}

}  // namespace

std::optional<double> IntersectTriangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                        const Vec3& c) {
  const Vec3& d = ray.direction;
  int kz = 0;
  d.cwiseAbs().maxCoeff(&kz);
  int kx = (kz + 1) % 3;
  int ky = (kx + 1) % 3;
  if (d[kz] < 0.0) std::swap(kx, ky);
  const double sx = d[kx] / d[kz];
  const double sy = d[ky] / d[kz];
  const double sz = 1.0 / d[kz];

  const Vec3 pa = a - ray.origin;
  const Vec3 pb = b - ray.origin;
  const Vec3 pc = c - ray.origin;
  const double ax = pa[kx] - sx * pa[kz];
  const double ay = pa[ky] - sy * pa[kz];
  const double bx = pb[kx] - sx * pb[kz];
  const double by = pb[ky] - sy * pb[kz];
  const double cx = pc[kx] - sx * pc[kz];
  const double cy = pc[ky] - sy * pc[kz];

  double u = cx * by - cy * bx;
  double v = ax * cy - ay * cx;
  double w = bx * ay - by * ax;
  if (u == 0.0 || v == 0.0 || w == 0.0) {
    const long double lu = static_cast<long double>(cx) * by - static_cast<long double>(cy) * bx;
    const long double lv = static_cast<long double>(ax) * cy - static_cast<long double>(ay) * cx;
    const long double lw = static_cast<long double>(bx) * ay - static_cast<long double>(by) * ax;
    u = static_cast<double>(lu);
    v = static_cast<double>(lv);
    w = static_cast<double>(lw);
  }
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;
  double det = u + v + w;
  if (det == 0.0) return std::nullopt;

  double t_scaled = u * (sz * pa[kz]) + v * (sz * pb[kz]) + w * (sz * pc[kz]);
  if (det < 0.0) {
    det = -det;
    t_scaled = -t_scaled;
  }
  if (t_scaled <= 0.0) return std::nullopt;
  return t_scaled / det;
}

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
  const auto& faces = mesh.faces();
  const auto& verts = mesh.vertices();
  centroids_.reserve(faces.size());
  for (const Face& f : faces) centroids_.push_back((verts[f[0]] + verts[f[1]] + verts[f[2]]) / 3.0);
  order_.resize(faces.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * faces.size());
  Build(0, static_cast<std::uint32_t>(faces.size()));
}

std::uint32_t Bvh::Build(std::uint32_t begin, std::uint32_t end) {
  const auto& faces = mesh_->faces();
  const auto& verts = mesh_->vertices();
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Face& f = faces[order_[i]];
    for (int k : f) box.Extend(verts[k]);
    centroid_box.Extend(centroids_[order_[i]]);
  }
  // Pad so rounding in the slab test never rejects a box whose triangles hit.
  const Vec3 pad = Vec3::Constant(1e-9 * box.Extent().maxCoeff() + 1e-12);
  box.min -= pad;
  box.max += pad;
  nodes_[index].box = box;

  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  int axis = 0;
  centroid_box.Extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::sort(order_.begin() + begin, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
    const double ca = centroids_[a][axis];
    const double cb = centroids_[b][axis];
    return ca < cb || (ca == cb && a < b);
  });
  Build(begin, mid);
  const std::uint32_t right = Build(mid, end);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

std::optional<Hit> Bvh::Intersect(const Ray& ray, double t_min, double t_max,
                                  int skip_face) const {
  const auto& faces = mesh_->faces();
  const auto& verts = mesh_->vertices();
  const Vec3 inv_dir = ray.direction.cwiseInverse();
  double best_t = t_max;
  int best_face = -1;

  // Nearer child first; entries whose box starts beyond the current best
  // are skipped when popped.
  struct Pending {
    std::uint32_t node;
    double entry;
  };
  Pending stack[64];
  int top = 0;
  double root_entry = 0.0;
  if (!nodes_.empty() && BoxOverlaps(nodes_[0].box, ray.origin, inv_dir, t_min, best_t, &root_entry)) {
    stack[top++] = {0, root_entry};
  }
  while (top > 0) {
    const Pending item = stack[--top];
    if (item.entry > best_t) continue;
    const Node& node = nodes_[item.node];
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const int f = static_cast<int>(order_[i]);
        if (f == skip_face) continue;
        const Face& tri = faces[f];
        const auto t = IntersectTriangle(ray, verts[tri[0]], verts[tri[1]], verts[tri[2]]);
        if (!t || !(*t > t_min) || !(*t < t_max)) continue;
        if (best_face < 0 || Closer(*t, f, best_t, best_face)) {
          best_t = *t;
          best_face = f;
        }
      }
    } else {
      const std::uint32_t left = item.node + 1;
      const std::uint32_t right = node.first;
      double tl = 0.0, tr = 0.0;
      const bool hit_left = BoxOverlaps(nodes_[left].box, ray.origin, inv_dir, t_min, best_t, &tl);
      const bool hit_right = BoxOverlaps(nodes_[right].box, ray.origin, inv_dir, t_min, best_t, &tr);
      if (hit_left && hit_right) {
        if (tl <= tr) {
          stack[top++] = {right, tr};
          stack[top++] = {left, tl};
        } else {
          stack[top++] = {left, tl};
          stack[top++] = {right, tr};
        }
      } else if (hit_left) {
        stack[top++] = {left, tl};
      } else if (hit_right) {
        stack[top++] = {right, tr};
      }
    }
  }
  if (best_face < 0) return std::nullopt;
  return MakeHit(*mesh_, ray, best_t, best_face);
}

std::optional<Hit> IntersectBruteForce(const TriangleMesh& mesh, const Ray& ray, double t_min,
                                       double t_max, int skip_face) {
  const auto& faces = mesh.faces();
  const auto& verts = mesh.vertices();
  double best_t = t_max;
  int best_face = -1;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    if (f == skip_face) continue;
    const Face& tri = faces[f];
    const auto t = IntersectTriangle(ray, verts[tri[0]], verts[tri[1]], verts[tri[2]]);
    if (!t || !(*t > t_min) || !(*t < t_max)) continue;
    if (best_face < 0 || Closer(*t, f, best_t, best_face)) {
      best_t = *t;
      best_face = f;
    }
  }
  if (best_face < 0) return std::nullopt;
  return MakeHit(mesh, ray, best_t, best_face);
}

std::optional<Hit> RayMeshIntersect(const Ray& ray, const Bvh& bvh, const Pose& pose) {
  const Mat3 rt = pose.rotation.transpose();
  const Ray local{rt * (ray.origin - pose.translation), rt * ray.direction};
  auto hit = bvh.Intersect(local);
  if (!hit) return std::nullopt;
  hit->point = ray.origin + hit->t * ray.direction;
  hit->normal = pose.rotation * hit->normal;
  return hit;
}

}  // namespace glasspose
