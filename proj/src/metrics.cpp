// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glasspose/error.hpp"
#include "glasspose/parallel.hpp"
#include "glasspose/refract_render.hpp"
#include "glasspose/surface_regions.hpp"

namespace glasspose {

void SymmetrySpec::Validate() const {
  for (const Pose& s : discrete) {
    if (!s.IsValid(1e-6)) Fail(ErrorCode::kInvalidArgument, "symmetry: transform is not a rotation");
  }
  for (const Axis& a : continuous) {
    if (!(a.direction.norm() > 0.0)) Fail(ErrorCode::kInvalidArgument, "symmetry: zero axis");
  }
}

std::vector<Pose> SymmetrySpec::Expand(double max_step) const {
  std::vector<Pose> out{Pose::Identity()};
  for (const Pose& s : discrete) {
    if ((s.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0 && s.translation.isZero()) continue;
    out.push_back(s);
  }
  if (continuous.empty()) return out;
  const int steps = static_cast<int>(std::ceil(M_PI / std::max(max_step, 1e-6)));
  const std::vector<Pose> base = out;
  for (const Axis& axis : continuous) {
    const Vec3 dir = axis.direction.normalized();
    for (int k = 1; k < 2 * steps; ++k) {
      Pose rot;
      rot.rotation = Eigen::AngleAxisd(M_PI * k / steps, dir).toRotationMatrix();
      rot.translation = axis.point - rot.rotation * axis.point;
      for (const Pose& b : base) out.push_back(Compose(rot, b));
    }
  }
  return out;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  Build(0, static_cast<int>(points_.size()), 0);
}

void KdTree::Build(int begin, int end, int depth) {
  if (end - begin <= 1) return;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
  Build(begin, mid, depth + 1);
  Build(mid + 1, end, depth + 1);
}

void KdTree::Search(int begin, int end, int depth, const Vec3& q, double& best) const {
  if (begin >= end) return;
  const int mid = begin + (end - begin) / 2;
  const Vec3& p = points_[mid];
  best = std::min(best, (p - q).squaredNorm());
  const int axis = depth % 3;
  const double diff = q[axis] - p[axis];
  if (diff < 0.0) {
    Search(begin, mid, depth + 1, q, best);
    if (diff * diff <= best) Search(mid + 1, end, depth + 1, q, best);
  } else {
    Search(mid + 1, end, depth + 1, q, best);
    if (diff * diff <= best) Search(begin, mid, depth + 1, q, best);
  }
}

double KdTree::NearestDistance(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  Search(0, static_cast<int>(points_.size()), 0, query, best);
  return std::sqrt(best);
}

namespace {

void RequirePoints(std::span<const Vec3> points, const char* what) {
  if (points.empty()) Fail(ErrorCode::kInvalidArgument, std::string(what) + ": no model points");
}

}  // namespace

double Add(const Pose& gt, const Pose& est, std::span<const Vec3> points) {
  RequirePoints(points, "add");
  double sum = 0.0;
  for (const Vec3& x : points) sum += (gt.Apply(x) - est.Apply(x)).norm();
  return sum / double(points.size());
}

double AddS(const Pose& gt, const Pose& est, std::span<const Vec3> points) {
  RequirePoints(points, "add_s");
  const KdTree tree(TransformPoints(est, points));
  double sum = 0.0;
  for (const Vec3& x : points) sum += tree.NearestDistance(gt.Apply(x));
  return sum / double(points.size());
}

double AddSBruteForce(const Pose& gt, const Pose& est, std::span<const Vec3> points) {
  RequirePoints(points, "add_s");
  const std::vector<Vec3> moved = TransformPoints(est, points);
  double sum = 0.0;
  for (const Vec3& x : points) {
    const Vec3 g = gt.Apply(x);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& m : moved) best = std::min(best, (m - g).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / double(points.size());
}

double AddRecall(std::span<const double> distances, double diameter, double threshold_fraction) {
  if (distances.empty()) return 0.0;
  const double limit = threshold_fraction * diameter;
  const auto hits = std::count_if(distances.begin(), distances.end(), [&](double d) { return d < limit; });
  return double(hits) / double(distances.size());
}

double AddRecall(std::span<const double> distances, std::span<const double> diameters,
                 double threshold_fraction) {
  if (distances.size() != diameters.size()) Fail(ErrorCode::kInvalidArgument, "add_recall: size mismatch");
  if (distances.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) hits += distances[i] < threshold_fraction * diameters[i];
  return double(hits) / double(distances.size());
}

double Mssd(const Pose& gt, const Pose& est, std::span<const Vec3> points,
            std::span<const Pose> symmetries) {
  RequirePoints(points, "mssd");
  const std::vector<Vec3> moved = TransformPoints(est, points);
  double best = std::numeric_limits<double>::infinity();
  const Pose identity[] = {Pose::Identity()};
  if (symmetries.empty()) symmetries = identity;
  for (const Pose& s : symmetries) {
    const Pose g = Compose(gt, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size() && worst < best; ++i) {
      worst = std::max(worst, (g.Apply(points[i]) - moved[i]).norm());
    }
    best = std::min(best, worst);
  }
  return best;
}

double Mspd(const Pose& gt, const Pose& est, std::span<const Vec3> points,
            std::span<const Pose> symmetries, const CameraIntrinsics& intr) {
  RequirePoints(points, "mspd");
  std::vector<Vec2> projected;
  projected.reserve(points.size());
  for (const Vec3& x : points) projected.push_back(Project(intr, est.Apply(x)));
  double best = std::numeric_limits<double>::infinity();
  const Pose identity[] = {Pose::Identity()};
  if (symmetries.empty()) symmetries = identity;
  for (const Pose& s : symmetries) {
    const Pose g = Compose(gt, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size() && worst < best; ++i) {
      worst = std::max(worst, (Project(intr, g.Apply(points[i])) - projected[i]).norm());
    }
    best = std::min(best, worst);
  }
  return best;
}

double Vsd(std::span<const double> depth_gt, std::span<const double> depth_est,
           std::span<const std::uint8_t> visible_gt, std::span<const std::uint8_t> visible_est,
           double tau) {
  const std::size_t n = depth_gt.size();
  if (depth_est.size() != n || visible_gt.size() != n || visible_est.size() != n) {
    Fail(ErrorCode::kInvalidArgument, "vsd: map size mismatch");
  }
  std::size_t union_count = 0, cost = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool g = visible_gt[i] != 0;
    const bool e = visible_est[i] != 0;
    if (!g && !e) continue;
    ++union_count;
    if (!(g && e) || !(std::abs(depth_gt[i] - depth_est[i]) < tau)) ++cost;
  }
  return union_count == 0 ? 1.0 : double(cost) / double(union_count);
}

double Vsd(std::span<const double> depth_gt, std::span<const double> depth_est, double tau) {
  std::vector<std::uint8_t> vg(depth_gt.size()), ve(depth_est.size());
  for (std::size_t i = 0; i < vg.size(); ++i) vg[i] = depth_gt[i] > 0.0;
  for (std::size_t i = 0; i < ve.size(); ++i) ve[i] = depth_est[i] > 0.0;
  return Vsd(depth_gt, depth_est, vg, ve, tau);
}

double MaeKeypoints(std::span<const Vec3> keypoints_3d, const Pose& est,
                    const CameraIntrinsics& intr, std::span<const Vec2> keypoints_2d) {
  if (keypoints_3d.size() != keypoints_2d.size() || keypoints_3d.empty()) {
    Fail(ErrorCode::kInvalidArgument, "mae: keypoint lists must be non-empty and equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < keypoints_3d.size(); ++i) {
    const Vec2 p = Project(intr, est.Apply(keypoints_3d[i]));
    sum += std::abs(p.x() - keypoints_2d[i].x()) + std::abs(p.y() - keypoints_2d[i].y());
  }
  return sum / (2.0 * double(keypoints_3d.size()));
}

ThresholdGrids ThresholdGrids::Default() {
  std::vector<double> grid, pixels;
  for (int k = 1; k <= 10; ++k) {
    grid.push_back(0.05 * k);
    pixels.push_back(5.0 * k);
  }
  return {grid, grid, grid, pixels};
}

void ComputeRecalls(InstanceMetrics& m, const CameraIntrinsics& intr, const ThresholdGrids& grids) {
  if (m.vsd.size() != grids.vsd_tau.size()) {
    Fail(ErrorCode::kInvalidArgument, "recalls: VSD errors do not match the tau grid");
  }
  std::size_t hits = 0;
  for (double e : m.vsd)
    for (double theta : grids.vsd_theta) hits += e < theta;
  m.vsd_recall = grids.vsd_tau.empty() || grids.vsd_theta.empty()
                     ? 0.0
                     : double(hits) / double(grids.vsd_tau.size() * grids.vsd_theta.size());
  hits = 0;
  for (double theta : grids.mssd_theta) hits += m.mssd < theta * m.diameter;
  m.mssd_recall = grids.mssd_theta.empty() ? 0.0 : double(hits) / double(grids.mssd_theta.size());
  const double r = std::hypot(double(intr.width), double(intr.height)) / 640.0;
  hits = 0;
  for (double theta : grids.mspd_theta) hits += m.mspd < theta * r;
  m.mspd_recall = grids.mspd_theta.empty() ? 0.0 : double(hits) / double(grids.mspd_theta.size());
}

ArScore ComputeAr(std::span<const InstanceMetrics> instances) {
  ArScore s;
  if (instances.empty()) return s;
  for (const InstanceMetrics& m : instances) {
    s.vsd += m.vsd_recall;
    s.mssd += m.mssd_recall;
    s.mspd += m.mspd_recall;
  }
  const double n = double(instances.size());
  s.vsd /= n;
  s.mssd /= n;
  s.mspd /= n;
  s.ar = (s.vsd + s.mssd + s.mspd) / 3.0;
  return s;
}

namespace {

std::vector<Vec3> ModelPoints(const TriangleMesh& mesh, int max_points) {
  const auto& v = mesh.vertices();
  if (max_points <= 0 || static_cast<int>(v.size()) <= max_points) return v;
  std::vector<Vec3> out;
  for (int i : FarthestPointSampling(v, max_points, 0)) out.push_back(v[i]);
  return out;
}

}  // namespace

InstanceMetrics EvaluateInstance(const EvalInput& input, const EvalOptions& options) {
  if (!input.mesh) Fail(ErrorCode::kInvalidArgument, "eval: missing mesh");
  input.symmetry.Validate();
  const TriangleMesh& mesh = *input.mesh;
  const std::vector<Vec3> points = ModelPoints(mesh, options.max_model_points);
  const std::vector<Pose> symmetries = input.symmetry.Expand(options.symmetry_step);

  InstanceMetrics m;
  m.id = input.id;
  m.diameter = mesh.diameter();
  m.symmetric = !input.symmetry.empty();
  m.add = Add(input.gt, input.est, points);
  m.add_s = AddS(input.gt, input.est, points);
  m.add_or_adds = m.symmetric ? m.add_s : m.add;
  m.mssd = Mssd(input.gt, input.est, points, symmetries);
  m.mspd = Mspd(input.gt, input.est, points, symmetries, input.intr);

  const SceneRenderer renderer(mesh);
  const std::vector<double> depth_gt = renderer.RenderDepth(input.gt, input.intr, 1);
  const std::vector<double> depth_est = renderer.RenderDepth(input.est, input.intr, 1);
  for (double tau : options.grids.vsd_tau) m.vsd.push_back(Vsd(depth_gt, depth_est, tau * m.diameter));
  ComputeRecalls(m, input.intr, options.grids);

  if (!input.keypoints_3d.empty()) {
    m.mae = MaeKeypoints(input.keypoints_3d, input.est, input.intr, input.keypoints_2d);
  }
  return m;
}

MetricReport Evaluate(std::span<const EvalInput> inputs, const EvalOptions& options) {
  MetricReport report;
  report.instances.resize(inputs.size());
  ParallelFor(static_cast<int>(inputs.size()), options.threads > 0 ? options.threads : DefaultThreads(),
              [&](int i) { report.instances[i] = EvaluateInstance(inputs[i], options); });
  std::vector<double> distances, diameters;
  double mae_sum = 0.0;
  int mae_count = 0;
  for (const InstanceMetrics& m : report.instances) {
    distances.push_back(m.add_or_adds);
    diameters.push_back(m.diameter);
    if (m.mae) {
      mae_sum += *m.mae;
      ++mae_count;
    }
  }
  report.add_recall_01d = AddRecall(distances, diameters, options.add_threshold);
  report.ar = ComputeAr(report.instances);
  if (mae_count > 0) report.mae = mae_sum / mae_count;
  report.model_points = options.max_model_points > 0
                            ? "mesh vertices, FPS-subsampled above " + std::to_string(options.max_model_points)
                            : "mesh vertices";
  return report;
}

}  // namespace glasspose
