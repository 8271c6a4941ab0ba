// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "glasspose/serialization.hpp"

namespace glasspose {

namespace fs = std::filesystem;

std::string LibraryVersion();

/// Intrinsics used when none are given: focal length equal to the image
/// width and the principal point at the image center.
CameraIntrinsics DefaultIntrinsics(int width, int height);

/// Parses "WxH" (e.g. "1080x720").
std::pair<int, int> ParseResolution(const std::string& text);

/// One render job. Relative paths are resolved against the directory of the
/// file the config came from.
struct SceneConfig {
  fs::path mesh;
  Pose pose;
  CameraIntrinsics intrinsics = DefaultIntrinsics(1080, 720);
  /// NaN background_depth places the plane one diameter behind the object.
  RenderConfig render = [] {
    RenderConfig r;
    r.background_depth = std::numeric_limits<double>::quiet_NaN();
    return r;
  }();
  fs::path background;
  fs::path out;
  std::uint64_t seed = 0;
  int region_count = kDefaultRegionCount;
};

SceneConfig SceneConfigFromJson(const Json& j, const fs::path& base_dir);
/// Everything that determines the rendered bytes (no output directory, no
/// thread count). Its FNV-1a hash is the config hash recorded in meta.json.
Json SceneConfigToJson(const SceneConfig& cfg);

struct SceneRender {
  RfaMaps maps;
  std::vector<double> depth;
  RegionMap regions;
  RenderDiagnostics diagnostics;
  RenderConfig render;  // with the resolved background depth
  std::vector<std::string> warnings;
};

SceneRender RenderScene(const TriangleMesh& mesh, const SceneConfig& cfg, int threads);

/// Writes flow.pfm, rho.pfm, mask.png, regions.png, depth.pfm and meta.json
/// to cfg.out. Returns the meta document.
Json CmdRender(const SceneConfig& cfg, int threads);

/// Composites the matte in `matte_dir` over `background`. A size mismatch is
/// an error unless `resize` is set, in which case the background is
/// resampled bilinearly to the matte size.
void CmdComposite(const fs::path& matte_dir, const fs::path& background, const fs::path& out,
                  bool resize);

struct ManifestEntry {
  std::string id;
  std::string mesh;  // paths are relative to the manifest directory
  Pose pose;
  std::optional<Pose> init_pose;
  std::optional<Pose> est_pose;
  CameraIntrinsics intrinsics;
  RenderConfig render;
  std::optional<SymmetrySpec> symmetry;
  std::vector<Vec3> keypoints_3d;
  std::vector<Vec2> keypoints_2d;
  std::string flow, rho, mask, regions, depth, composite, meta;
};

struct DatasetManifest {
  std::vector<ManifestEntry> scenes;
};

Json ManifestToJson(const DatasetManifest& manifest);
DatasetManifest ManifestFromJson(const Json& j, const std::string& path = "manifest");
DatasetManifest ReadManifest(const fs::path& path);
void WriteManifest(const fs::path& path, const DatasetManifest& manifest);

/// Template for dataset generation. Translations are drawn uniformly in the
/// box [translation_min, translation_max] (camera frame, meters).
struct DatasetConfig {
  std::vector<fs::path> meshes;
  CameraIntrinsics intrinsics = DefaultIntrinsics(1080, 720);
  RenderConfig render = SceneConfig{}.render;
  int count = 1;
  std::uint64_t seed = 0;
  Vec3 translation_min{-0.05, -0.05, 0.7};
  Vec3 translation_max{0.05, 0.05, 0.9};
  /// Init poses for the solver: rotation perturbed by an angle uniform in
  /// [0, init_rotation_deg] about a uniform axis, translation by a uniform
  /// direction times [0, init_translation] * diameter.
  double init_rotation_deg = 15.0;
  double init_translation = 0.10;
  fs::path background;
  int region_count = kDefaultRegionCount;
  std::optional<SymmetrySpec> symmetry;
};

DatasetConfig DatasetConfigFromJson(const Json& j, const fs::path& base_dir);

/// Renders `count` scenes into out/scene_NNNNN and writes out/manifest.json
/// once all scenes are done.
DatasetManifest CmdGenDataset(const DatasetConfig& cfg, const fs::path& out, int threads);

/// Reads the render parameters recorded in a matte directory's meta.json.
std::optional<RenderConfig> ReadMetaRender(const fs::path& matte_dir);

SolveResult CmdSolve(const RfaMaps& observed, const TriangleMesh& mesh,
                     const CameraIntrinsics& intr, const RenderConfig& render, const Pose& init,
                     const SolverOptions& opts);

/// Solves every scene of a manifest from its init pose and writes a copy of
/// the manifest, with est_pose filled in, to `out_manifest`. Scenes are
/// processed in parallel; each solve runs single-threaded.
DatasetManifest CmdSolveManifest(const fs::path& manifest_path, const fs::path& out_manifest,
                                 const SolverOptions& opts, int threads,
                                 std::vector<SolveResult>* results = nullptr);

/// Evaluates est_pose against pose for every entry. Writes the report JSON
/// and a per-mesh CSV table with a final mean row.
MetricReport CmdEval(const fs::path& manifest_path, const fs::path& report_json,
                     const fs::path& table_csv, const EvalOptions& opts);

struct LossReportInputs {
  fs::path gt_dir;
  fs::path est_dir;
  fs::path background;  // optional, enables the compositing loss
  fs::path mesh;        // optional with the poses below, enables pose losses
  std::optional<Pose> gt_pose;
  std::optional<Pose> est_pose;
  std::optional<CameraIntrinsics> intrinsics;
  Reduction reduction = Reduction::kMean;
};

Json CmdEvalLosses(const LossReportInputs& in);

/// Single-scene solve from a request document:
///   maps | flow, rho, mask   observed matte (paths)
///   mesh                     mesh path
///   intrinsics, render       optional; default to the values in the matte
///                            directory's meta.json
///   init_pose | init_depth   explicit init, or mask-centroid back-projection
///   solver                   optional SolverOptions fields
/// Returns the SolveResult document plus the init pose used.
Json CmdSolveRequest(const Json& request);

EvalOptions EvalOptionsFromJson(const Json& j, const std::string& path = "eval");

/// Runs the analytic oracle checks. `passed` is false if any check failed.
Json RunSelfTest(bool& passed);

}  // namespace glasspose
