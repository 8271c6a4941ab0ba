// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/pose_solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "glasspose/error.hpp"
#include "glasspose/parallel.hpp"
#include "glasspose/random.hpp"

namespace glasspose {

std::string ToString(Optimizer optimizer) {
  return optimizer == Optimizer::kFiniteDifference ? "finite-difference-gradient" : "nelder-mead";
}

Optimizer OptimizerFromString(const std::string& name) {
  if (name == "nelder-mead") return Optimizer::kNelderMead;
  if (name == "finite-difference-gradient" || name == "fd") return Optimizer::kFiniteDifference;
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

void SolverOptions::Validate() const {
  if (w_flow < 0.0 || w_rho < 0.0 || w_mask < 0.0 || w_flow + w_rho + w_mask <= 0.0) {
    Fail(ErrorCode::kInvalidArgument, "solver: weights must be >= 0 and not all zero");
  }
  if (max_evaluations < 1) Fail(ErrorCode::kInvalidArgument, "solver: max_evaluations must be >= 1");
  if (multi_start < 1) Fail(ErrorCode::kInvalidArgument, "solver: multi_start must be >= 1");
  if (!(tolerance >= 0.0)) Fail(ErrorCode::kInvalidArgument, "solver: tolerance must be >= 0");
  if (perturb_rotation_deg < 0.0 || perturb_translation < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "solver: perturbation scales must be >= 0");
  }
}

double Objective(const SceneRenderer& renderer, const Pose& candidate, const RfaMaps& observed,
                 const CameraIntrinsics& intr, const RenderConfig& cfg, const SolverOptions& opts) {
  if (observed.width != intr.width || observed.height != intr.height) {
    Fail(ErrorCode::kInvalidArgument, "objective: observation size differs from intrinsics");
  }
  const RfaMaps rendered = renderer.RenderRfa(candidate, intr, cfg);
  double value = 0.0;
  if (opts.w_flow > 0.0) value += opts.w_flow * LossFlow(observed, rendered);
  if (opts.w_rho > 0.0) value += opts.w_rho * LossRho(observed, rendered);
  if (opts.w_mask > 0.0) value += opts.w_mask * LossMask(observed, rendered);
  return value;
}

namespace {

using Params = Eigen::Matrix<double, 6, 1>;

constexpr double kRotationUnit = 5.0 * M_PI / 180.0;
constexpr double kTranslationUnit = 0.02;  // fraction of the diameter

struct Chart {
  Pose center;
  double translation_unit;

  Pose At(const Params& p) const {
    Pose out;
    out.rotation = RotationFromVector(p.head<3>() * kRotationUnit) * center.rotation;
    out.translation = center.translation + p.tail<3>() * translation_unit;
    return out;
  }
};

struct LocalResult {
  Params best = Params::Zero();
  double value = 0.0;
  bool tolerance_reached = false;
};

class StartRunner {
 public:
  StartRunner(const SceneRenderer& renderer, const RfaMaps& observed, const CameraIntrinsics& intr,
              const RenderConfig& cfg, const SolverOptions& opts, int start)
      : renderer_(renderer), observed_(observed), intr_(intr), cfg_(cfg), opts_(opts), start_(start) {}

  double Eval(const Pose& pose) {
    ++evaluations_;
    return Objective(renderer_, pose, observed_, intr_, cfg_, opts_);
  }
  bool Exhausted() const { return evaluations_ >= opts_.max_evaluations; }
  int evaluations() const { return evaluations_; }

  void Record(double value) {
    if (trace.empty() || value < trace.back().objective) {
      trace.push_back({start_, evaluations_, value});
    }
  }

  LocalResult NelderMead(const Chart& chart, double center_value, double step) {
    std::array<Params, 7> simplex;
    std::array<double, 7> f;
    simplex[0] = Params::Zero();
    f[0] = center_value;
    for (int i = 0; i < 6; ++i) {
      simplex[i + 1] = Params::Zero();
      simplex[i + 1][i] = step;
      f[i + 1] = Eval(chart.At(simplex[i + 1]));
      Record(f[i + 1]);
    }
    auto eval = [&](const Params& p) { return Eval(chart.At(p)); };
    std::array<int, 7> order;
    LocalResult result;
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
      const int best = order[0], worst = order[6], second = order[5];
      Record(f[best]);
      double size = 0.0;
      for (int i = 0; i < 7; ++i) size = std::max(size, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
      if (f[worst] - f[best] <= opts_.tolerance || size < 1e-4) {
        result.tolerance_reached = true;
        break;
      }
      if (Exhausted()) break;

      Params centroid = Params::Zero();
      for (int i = 0; i < 7; ++i)
        if (i != worst) centroid += simplex[i];
      centroid /= 6.0;
      const Params reflected = centroid + (centroid - simplex[worst]);
      const double fr = eval(reflected);
      if (fr < f[best]) {
        const Params expanded = centroid + 2.0 * (centroid - simplex[worst]);
        const double fe = Exhausted() ? INFINITY : eval(expanded);
        if (fe < fr) {
          simplex[worst] = expanded;
          f[worst] = fe;
        } else {
          simplex[worst] = reflected;
          f[worst] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        simplex[worst] = reflected;
        f[worst] = fr;
        continue;
      }
      const bool outside = fr < f[worst];
      const Params contracted = outside ? Params(centroid + 0.5 * (reflected - centroid))
                                        : Params(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = Exhausted() ? INFINITY : eval(contracted);
      if (fc < (outside ? fr : f[worst])) {
        simplex[worst] = contracted;
        f[worst] = fc;
        continue;
      }
      for (int i = 0; i < 7; ++i) {
        if (i == best || Exhausted()) continue;
        simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
        f[i] = eval(simplex[i]);
      }
    }
    const int best = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
    result.best = simplex[best];
    result.value = f[best];
    return result;
  }

  LocalResult GradientDescent(const Chart& chart, double center_value, double step) {
    LocalResult result;
    result.value = center_value;
    const double h = 0.05 * step;
    Params grad;
    for (int i = 0; i < 6 && !Exhausted(); ++i) {
      Params e = Params::Zero();
      e[i] = h;
      grad[i] = (Eval(chart.At(e)) - Eval(chart.At(-e))) / (2.0 * h);
    }
    const double norm = grad.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      result.tolerance_reached = true;
      return result;
    }
    double alpha = step;
    while (!Exhausted() && alpha > 1e-4) {
      const Params p = -alpha * grad / norm;
      const double v = Eval(chart.At(p));
      if (v < center_value) {
        result.best = p;
        result.value = v;
        result.tolerance_reached = center_value - v <= opts_.tolerance;
        return result;
      }
      alpha *= 0.5;
    }
    result.tolerance_reached = alpha <= 1e-4;
    return result;
  }

  std::vector<TraceEntry> trace;

 private:
  const SceneRenderer& renderer_;
  const RfaMaps& observed_;
  const CameraIntrinsics& intr_;
  const RenderConfig& cfg_;
  const SolverOptions& opts_;
  int start_;
  int evaluations_ = 0;
};

struct StartOutcome {
  Pose pose;
  double value = INFINITY;
  int evaluations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
};

}  // namespace

SolveResult SolvePose(const RfaMaps& observed, const TriangleMesh& mesh,
                      const CameraIntrinsics& intr, const RenderConfig& cfg, const Pose& init,
                      const SolverOptions& opts) {
  opts.Validate();
  intr.Validate();
  if (!init.IsValid(1e-6)) Fail(ErrorCode::kInvalidArgument, "solve: init rotation is not orthonormal");
  const SceneRenderer renderer(mesh);
  const int outer_threads = opts.threads > 0 ? opts.threads : DefaultThreads();
  RenderConfig inner_cfg = cfg;
  inner_cfg.threads = 1;

  const CounterRng root(opts.seed, 0x736f6c7665ull);
  std::vector<Pose> starts(opts.multi_start, init);
  for (int s = 1; s < opts.multi_start; ++s) {
    CounterRng rng = root.Split(s);
    const double angle = rng.Uniform() * opts.perturb_rotation_deg * M_PI / 180.0;
    const Vec3 axis = UniformUnitVector(rng);
    const Vec3 offset = UniformUnitVector(rng) * rng.Uniform() * opts.perturb_translation * mesh.diameter();
    starts[s].rotation = RotationFromVector(axis * angle) * init.rotation;
    starts[s].translation = init.translation + offset;
  }

  std::vector<StartOutcome> outcomes(opts.multi_start);
  double init_value = 0.0;
  ParallelFor(opts.multi_start, outer_threads, [&](int s) {
    StartRunner runner(renderer, observed, intr, inner_cfg, opts, s);
    Chart chart{starts[s], kTranslationUnit * mesh.diameter()};
    double value = runner.Eval(chart.center);
    if (s == 0) init_value = value;
    runner.Record(value);
    double step = 1.0;
    bool converged = false;
    while (!runner.Exhausted()) {
      const LocalResult local = opts.optimizer == Optimizer::kNelderMead
                                    ? runner.NelderMead(chart, value, step)
                                    : runner.GradientDescent(chart, value, step);
      const bool improved = local.value < value;
      if (improved) {
        const double gain = value - local.value;
        chart.center = chart.At(local.best);
        value = local.value;
        if (opts.optimizer == Optimizer::kNelderMead) step = std::max(0.5 * step, 0.05);
        if (gain > opts.tolerance) continue;
      } else if (opts.optimizer == Optimizer::kFiniteDifference && step > 0.01) {
        step *= 0.5;
        continue;
      }
      converged = local.tolerance_reached || !improved;
      break;
    }
    outcomes[s] = {chart.center, value, runner.evaluations(), converged, std::move(runner.trace)};
  });

  SolveResult result;
  result.init_objective = init_value;
  int best = 0;
  for (int s = 1; s < opts.multi_start; ++s) {
    if (outcomes[s].value < outcomes[best].value) best = s;
  }
  result.best_start = best;
  result.pose = outcomes[best].pose;
  result.objective = outcomes[best].value;
  result.converged = outcomes[best].converged && outcomes[best].value <= init_value;
  for (const StartOutcome& o : outcomes) {
    result.evaluations += o.evaluations;
    result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
  }
  return result;
}

Pose Procrustes(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) Fail(ErrorCode::kInvalidArgument, "procrustes: point counts differ");
  if (src.size() < 3) Fail(ErrorCode::kDegenerate, "procrustes: need at least 3 point pairs");
  const double n = double(src.size());
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;
  Mat3 cov = Mat3::Zero();
  Mat3 spread = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cov += (src[i] - cs) * (dst[i] - cd).transpose();
    spread += (src[i] - cs) * (src[i] - cs).transpose();
  }
  const Eigen::JacobiSVD<Mat3> spread_svd(spread);
  const Vec3 sv = spread_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    Fail(ErrorCode::kDegenerate, "procrustes: source points are collinear or coincident");
  }
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Pose pose;
  pose.rotation = v * d * u.transpose();
  pose.translation = cd - pose.rotation * cs;
  return pose;
}

double CropBox::zoom() const {
  return output_size > 0.0 ? output_size / std::max(width, height) : 1.0;
}

namespace {
void ValidateCrop(const CropBox& crop, const CameraIntrinsics& intr) {
  if (!(crop.width > 0.0) || !(crop.height > 0.0)) Fail(ErrorCode::kInvalidArgument, "site: zero-size crop");
  if (crop.x < 0.0 || crop.y < 0.0 || crop.x + crop.width > intr.width ||
      crop.y + crop.height > intr.height) {
    Fail(ErrorCode::kInvalidArgument, "site: crop box outside image");
  }
}
}  // namespace

PoseDeltas EncodeSite(const Pose& pose, const CameraIntrinsics& intr, const CropBox& crop) {
  ValidateCrop(crop, intr);
  const Vec2 center = Project(intr, pose.translation);
  PoseDeltas d;
  d.dx = (center.x() - (crop.x + 0.5 * crop.width)) / crop.width;
  d.dy = (center.y() - (crop.y + 0.5 * crop.height)) / crop.height;
  d.dz = pose.translation.z() / crop.zoom();
  return d;
}

Vec3 DecodeSite(const PoseDeltas& deltas, const CameraIntrinsics& intr, const CropBox& crop) {
  ValidateCrop(crop, intr);
  const Vec2 center(crop.x + 0.5 * crop.width + deltas.dx * crop.width,
                    crop.y + 0.5 * crop.height + deltas.dy * crop.height);
  return Unproject(intr, center, deltas.dz * crop.zoom());
}

Pose InitFromMask(std::span<const double> mask, const CameraIntrinsics& intr, double depth,
                  const Mat3& rotation) {
  if (mask.size() != std::size_t(intr.width) * intr.height) {
    Fail(ErrorCode::kInvalidArgument, "init: mask size differs from intrinsics");
  }
  double sum = 0.0, su = 0.0, sv = 0.0;
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      const double m = mask[std::size_t(y) * intr.width + x];
      sum += m;
      su += m * x;
      sv += m * y;
    }
  }
  if (!(sum > 0.0)) Fail(ErrorCode::kInvalidArgument, "init: empty mask");
  if (!(depth > 0.0)) Fail(ErrorCode::kInvalidArgument, "init: depth must be positive");
  Pose pose;
  pose.rotation = rotation;
  pose.translation = Unproject(intr, Vec2(su / sum, sv / sum), depth);
  return pose;
}

}  // namespace glasspose
