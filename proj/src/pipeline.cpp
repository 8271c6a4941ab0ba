// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "glasspose/compositing.hpp"
#include "glasspose/error.hpp"
#include "glasspose/image.hpp"
#include "glasspose/parallel.hpp"
#include "glasspose/random.hpp"
#include "json_fields.hpp"

#ifndef GLASSPOSE_VERSION
#define GLASSPOSE_VERSION "0.0.0"
#endif

namespace glasspose {

using namespace json_fields;

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

/// `target` expressed relative to directory `dir`, with forward slashes.
std::string RelativeTo(const fs::path& target, const fs::path& dir) {
  const fs::path a = fs::absolute(target).lexically_normal();
  const fs::path b = fs::absolute(dir).lexically_normal();
  return a.lexically_relative(b).generic_string();
}

std::uint64_t Seed(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    FieldError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

int RegionCount(const Json& j, const std::string& path) {
  const int k = Integer(j, path);
  if (k < 1 || k > 255) FieldError(path, "must be in [1, 255]");
  return k;
}

std::vector<Vec2> Vec2Array(const Json& j, const std::string& path) {
  if (!j.is_array()) FieldError(path, "expected an array");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto a = NumberArray(j[i], 2, path + "[" + std::to_string(i) + "]");
    out.emplace_back(a[0], a[1]);
  }
  return out;
}

std::vector<Vec3> Vec3Array(const Json& j, const std::string& path) {
  if (!j.is_array()) FieldError(path, "expected an array");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(Vec3FromJson(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string RelativePath(const Json& j, const std::string& path) {
  const std::string s = String(j, path);
  if (s.empty()) FieldError(path, "must not be empty");
  if (fs::path(s).is_absolute()) FieldError(path, "must be relative to the manifest");
  return s;
}

Image LoadBackground(const fs::path& path, int width, int height) {
  Image bg = ReadPngImage(path);
  if (bg.width != width || bg.height != height) bg = Resize(bg, width, height);
  return bg;
}

void WriteSceneFiles(const fs::path& dir, const SceneRender& r) {
  fs::create_directories(dir);
  WriteMaps(dir, r.maps);
  WriteRegions(dir / "regions.png", r.regions);
  WriteDepth(dir / "depth.pfm", r.maps.width, r.maps.height, r.depth);
}

Json MetaJson(const SceneConfig& cfg, const SceneRender& r) {
  const Json config = SceneConfigToJson(cfg);
  return {{"version", LibraryVersion()},
          {"config_hash", Fnv1aHex(config.dump())},
          {"config", config},
          {"render", RenderConfigToJson(r.render)},
          {"diagnostics", DiagnosticsToJson(r.diagnostics)},
          {"anchors", AnchorsToJson(r.regions.anchors)},
          {"warnings", r.warnings}};
}

/// "intrinsics" wins over "resolution"; the latter selects
/// DefaultIntrinsics for a "WxH" string.
CameraIntrinsics IntrinsicsOrResolution(const Json& j, const std::string& path, const CameraIntrinsics& fallback) {
  if (j.contains("intrinsics")) return IntrinsicsFromJson(j["intrinsics"], path + ".intrinsics");
  if (j.contains("resolution")) {
    try {
      const auto [w, h] = ParseResolution(String(j["resolution"], path + ".resolution"));
      return DefaultIntrinsics(w, h);
    } catch (const Error& e) {
      FieldError(path + ".resolution", e.what());
    }
  }
  return fallback;
}

std::string FormatFixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string LibraryVersion() { return GLASSPOSE_VERSION; }

CameraIntrinsics DefaultIntrinsics(int width, int height) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = width;
  intr.cx = 0.5 * (width - 1);
  intr.cy = 0.5 * (height - 1);
  intr.width = width;
  intr.height = height;
  return intr;
}

std::pair<int, int> ParseResolution(const std::string& text) {
  int w = 0, h = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> w >> sep >> h) || (sep != 'x' && sep != 'X') || !in.eof() || w <= 0 || h <= 0) {
    Fail(ErrorCode::kInvalidArgument, "resolution: expected WIDTHxHEIGHT, got '" + text + "'");
  }
  return {w, h};
}

SceneConfig SceneConfigFromJson(const Json& j, const fs::path& base_dir) {
  const std::string path = "scene";
  SceneConfig cfg;
  cfg.mesh = Resolve(base_dir, String(Member(j, "mesh", path), path + ".mesh"));
  cfg.pose = PoseFromJson(Member(j, "pose", path), path + ".pose");
  cfg.intrinsics = IntrinsicsOrResolution(j, path, cfg.intrinsics);
  if (j.contains("render")) cfg.render = RenderConfigFromJson(j["render"], path + ".render", cfg.render);
  if (j.contains("background")) cfg.background = Resolve(base_dir, String(j["background"], path + ".background"));
  if (j.contains("out")) cfg.out = Resolve(base_dir, String(j["out"], path + ".out"));
  if (j.contains("seed")) cfg.seed = Seed(j["seed"], path + ".seed");
  if (j.contains("region_count")) cfg.region_count = RegionCount(j["region_count"], path + ".region_count");
  return cfg;
}

Json SceneConfigToJson(const SceneConfig& cfg) {
  return {{"mesh", cfg.mesh.generic_string()},
          {"pose", PoseToJson(cfg.pose)},
          {"intrinsics", IntrinsicsToJson(cfg.intrinsics)},
          {"render", RenderConfigToJson(cfg.render)},
          {"seed", cfg.seed},
          {"region_count", cfg.region_count}};
}

SceneRender RenderScene(const TriangleMesh& mesh, const SceneConfig& cfg, int threads) {
  if (cfg.region_count < 1 || cfg.region_count > 255) {
    Fail(ErrorCode::kInvalidArgument, "scene.region_count: must be in [1, 255]");
  }
  SceneRender r;
  r.render = cfg.render;
  if (std::isnan(r.render.background_depth)) r.render.background_depth = SuggestBackgroundDepth(mesh, cfg.pose);
  r.render.threads = threads;
  r.warnings = mesh.warnings();

  const SceneRenderer renderer(mesh);
  r.maps = renderer.RenderRfa(cfg.pose, cfg.intrinsics, r.render, &r.diagnostics);
  r.depth = renderer.RenderDepth(cfg.pose, cfg.intrinsics, threads);
  const CorrespondenceMap corr = RenderCorrespondence(renderer, cfg.pose, cfg.intrinsics, threads);
  const int vertex_count = static_cast<int>(mesh.vertices().size());
  const int regions = std::min(cfg.region_count, vertex_count);
  if (regions < cfg.region_count) {
    r.warnings.push_back("region_count " + std::to_string(cfg.region_count) + " exceeds the " +
                         std::to_string(vertex_count) + " mesh vertices; using " + std::to_string(regions) +
                         " regions");
  }
  const std::vector<Vec3> anchors = RegionAnchors(mesh, regions, cfg.seed);
  r.regions = RegionsFromCorrespondence(corr, anchors, mesh.bounds());
  if (r.diagnostics.mask_pixels == 0) r.warnings.push_back("empty scene: the object covers no pixel");
  return r;
}

Json CmdRender(const SceneConfig& cfg, int threads) {
  if (cfg.out.empty()) Fail(ErrorCode::kInvalidArgument, "scene.out: missing output directory");
  const TriangleMesh mesh = LoadMesh(cfg.mesh);
  const SceneRender r = RenderScene(mesh, cfg, threads);
  WriteSceneFiles(cfg.out, r);
  const Json meta = MetaJson(cfg, r);
  WriteJsonFile(cfg.out / "meta.json", meta);
  return meta;
}

void CmdComposite(const fs::path& matte_dir, const fs::path& background, const fs::path& out,
                  bool resize) {
  const RfaMaps maps = ReadMaps(matte_dir);
  Image bg = ReadPngImage(background);
  if (bg.width != maps.width || bg.height != maps.height) {
    if (!resize) {
      Fail(ErrorCode::kInvalidArgument,
           "composite: background is " + std::to_string(bg.width) + "x" + std::to_string(bg.height) +
               " but the matte is " + std::to_string(maps.width) + "x" + std::to_string(maps.height));
    }
    bg = Resize(bg, maps.width, maps.height);
  }
  WritePngImage(out, Composite(maps, bg));
}

Json ManifestToJson(const DatasetManifest& manifest) {
  Json scenes = Json::array();
  for (const ManifestEntry& e : manifest.scenes) {
    Json s = {{"id", e.id},
              {"mesh", e.mesh},
              {"pose", PoseToJson(e.pose)},
              {"intrinsics", IntrinsicsToJson(e.intrinsics)},
              {"render", RenderConfigToJson(e.render)},
              {"flow", e.flow},
              {"rho", e.rho},
              {"mask", e.mask},
              {"regions", e.regions},
              {"depth", e.depth},
              {"meta", e.meta}};
    if (e.init_pose) s["init_pose"] = PoseToJson(*e.init_pose);
    if (e.est_pose) s["est_pose"] = PoseToJson(*e.est_pose);
    if (e.symmetry) s["symmetry"] = SymmetryToJson(*e.symmetry);
    if (!e.composite.empty()) s["composite"] = e.composite;
    if (!e.keypoints_3d.empty()) {
      Json k3 = Json::array(), k2 = Json::array();
      for (const Vec3& k : e.keypoints_3d) k3.push_back(Vec3ToJson(k));
      for (const Vec2& k : e.keypoints_2d) k2.push_back(Json::array({k.x(), k.y()}));
      s["keypoints_3d"] = k3;
      s["keypoints_2d"] = k2;
    }
    scenes.push_back(std::move(s));
  }
  return {{"format", "glasspose-manifest"}, {"version", 1}, {"scenes", scenes}};
}

DatasetManifest ManifestFromJson(const Json& j, const std::string& path) {
  if (j.contains("format") && j["format"] != "glasspose-manifest") {
    FieldError(path + ".format", "expected \"glasspose-manifest\"");
  }
  if (j.contains("version") && j["version"] != 1) FieldError(path + ".version", "unsupported version");
  const Json& scenes = Member(j, "scenes", path);
  if (!scenes.is_array()) FieldError(path + ".scenes", "expected an array");
  DatasetManifest m;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Json& s = scenes[i];
    const std::string p = path + ".scenes[" + std::to_string(i) + "]";
    ManifestEntry e;
    e.id = String(Member(s, "id", p), p + ".id");
    if (!ids.insert(e.id).second) FieldError(p + ".id", "duplicate id '" + e.id + "'");
    e.mesh = RelativePath(Member(s, "mesh", p), p + ".mesh");
    e.pose = PoseFromJson(Member(s, "pose", p), p + ".pose");
    if (s.contains("init_pose")) e.init_pose = PoseFromJson(s["init_pose"], p + ".init_pose");
    if (s.contains("est_pose")) e.est_pose = PoseFromJson(s["est_pose"], p + ".est_pose");
    e.intrinsics = IntrinsicsFromJson(Member(s, "intrinsics", p), p + ".intrinsics");
    e.render = RenderConfigFromJson(Member(s, "render", p), p + ".render");
    if (s.contains("symmetry")) e.symmetry = SymmetryFromJson(s["symmetry"], p + ".symmetry");
    if (s.contains("keypoints_3d")) e.keypoints_3d = Vec3Array(s["keypoints_3d"], p + ".keypoints_3d");
    if (s.contains("keypoints_2d")) e.keypoints_2d = Vec2Array(s["keypoints_2d"], p + ".keypoints_2d");
    if (e.keypoints_3d.size() != e.keypoints_2d.size()) {
      FieldError(p + ".keypoints_2d", "must have as many entries as keypoints_3d");
    }
    e.flow = RelativePath(Member(s, "flow", p), p + ".flow");
    e.rho = RelativePath(Member(s, "rho", p), p + ".rho");
    e.mask = RelativePath(Member(s, "mask", p), p + ".mask");
    e.regions = RelativePath(Member(s, "regions", p), p + ".regions");
    e.depth = RelativePath(Member(s, "depth", p), p + ".depth");
    e.meta = RelativePath(Member(s, "meta", p), p + ".meta");
    if (s.contains("composite")) e.composite = RelativePath(s["composite"], p + ".composite");
    m.scenes.push_back(std::move(e));
  }
  return m;
}

DatasetManifest ReadManifest(const fs::path& path) { return ManifestFromJson(ReadJsonFile(path)); }

void WriteManifest(const fs::path& path, const DatasetManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteJsonFile(path, ManifestToJson(manifest));
}

DatasetConfig DatasetConfigFromJson(const Json& j, const fs::path& base_dir) {
  const std::string path = "dataset";
  DatasetConfig cfg;
  if (j.contains("meshes")) {
    const Json& list = j["meshes"];
    if (!list.is_array() || list.empty()) FieldError(path + ".meshes", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.meshes.push_back(Resolve(base_dir, String(list[i], path + ".meshes[" + std::to_string(i) + "]")));
    }
  } else {
    cfg.meshes.push_back(Resolve(base_dir, String(Member(j, "mesh", path), path + ".mesh")));
  }
  cfg.intrinsics = IntrinsicsOrResolution(j, path, cfg.intrinsics);
  if (j.contains("render")) cfg.render = RenderConfigFromJson(j["render"], path + ".render", cfg.render);
  if (j.contains("count")) {
    cfg.count = Integer(j["count"], path + ".count");
    if (cfg.count < 1) FieldError(path + ".count", "must be >= 1");
  }
  if (j.contains("seed")) cfg.seed = Seed(j["seed"], path + ".seed");
  if (j.contains("translation_min")) cfg.translation_min = Vec3FromJson(j["translation_min"], path + ".translation_min");
  if (j.contains("translation_max")) cfg.translation_max = Vec3FromJson(j["translation_max"], path + ".translation_max");
  if ((cfg.translation_max - cfg.translation_min).minCoeff() < 0.0) {
    FieldError(path + ".translation_max", "must be >= translation_min component-wise");
  }
  if (!(cfg.translation_min.z() > 0.0)) FieldError(path + ".translation_min", "z must be positive");
  if (j.contains("init_rotation_deg")) cfg.init_rotation_deg = Number(j["init_rotation_deg"], path + ".init_rotation_deg");
  if (j.contains("init_translation")) cfg.init_translation = Number(j["init_translation"], path + ".init_translation");
  if (cfg.init_rotation_deg < 0.0) FieldError(path + ".init_rotation_deg", "must be >= 0");
  if (cfg.init_translation < 0.0) FieldError(path + ".init_translation", "must be >= 0");
  if (j.contains("background")) cfg.background = Resolve(base_dir, String(j["background"], path + ".background"));
  if (j.contains("region_count")) cfg.region_count = RegionCount(j["region_count"], path + ".region_count");
  if (j.contains("symmetry")) cfg.symmetry = SymmetryFromJson(j["symmetry"], path + ".symmetry");
  return cfg;
}

DatasetManifest CmdGenDataset(const DatasetConfig& cfg, const fs::path& out, int threads) {
  if (cfg.meshes.empty()) Fail(ErrorCode::kInvalidArgument, "dataset.mesh: missing");
  if (cfg.count < 1) Fail(ErrorCode::kInvalidArgument, "dataset.count: must be >= 1");
  cfg.intrinsics.Validate();
  std::vector<TriangleMesh> meshes;
  for (const fs::path& p : cfg.meshes) meshes.push_back(LoadMesh(p));
  for (const TriangleMesh& m : meshes) m.RequireClosed();

  std::optional<Image> background;
  if (!cfg.background.empty()) {
    background = LoadBackground(cfg.background, cfg.intrinsics.width, cfg.intrinsics.height);
  }

  fs::create_directories(out);
  const CounterRng root(cfg.seed);
  DatasetManifest manifest;
  manifest.scenes.resize(cfg.count);
  const int workers = threads > 0 ? threads : DefaultThreads();

  ParallelFor(cfg.count, workers, [&](int i) {
    CounterRng rng = root.Split(static_cast<std::uint64_t>(i));
    const std::size_t mesh_index = rng.UniformIndex(meshes.size());
    const TriangleMesh& mesh = meshes[mesh_index];

    SceneConfig scene;
    scene.mesh = cfg.meshes[mesh_index];
    scene.intrinsics = cfg.intrinsics;
    scene.render = cfg.render;
    scene.seed = cfg.seed;
    scene.region_count = cfg.region_count;
    scene.pose.rotation = UniformRotation(rng);
    for (int k = 0; k < 3; ++k) {
      scene.pose.translation[k] = rng.Uniform(cfg.translation_min[k], cfg.translation_max[k]);
    }

    const double angle = rng.Uniform(0.0, cfg.init_rotation_deg) * std::numbers::pi / 180.0;
    const Vec3 axis = UniformUnitVector(rng);
    const double shift = rng.Uniform(0.0, cfg.init_translation) * mesh.diameter();
    const Vec3 direction = UniformUnitVector(rng);
    Pose init;
    init.rotation = RotationFromVector(angle * axis) * scene.pose.rotation;
    init.translation = scene.pose.translation + shift * direction;

    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05d", i);
    const fs::path dir = out / name;
    scene.out = dir;
    const SceneRender r = RenderScene(mesh, scene, 1);
    WriteSceneFiles(dir, r);
    WriteJsonFile(dir / "meta.json", MetaJson(scene, r));

    ManifestEntry e;
    e.id = name;
    e.mesh = RelativeTo(scene.mesh, out);
    e.pose = scene.pose;
    e.init_pose = init;
    e.intrinsics = scene.intrinsics;
    e.render = r.render;
    e.render.threads = 0;
    e.symmetry = cfg.symmetry;
    const std::string prefix = std::string(name) + "/";
    e.flow = prefix + "flow.pfm";
    e.rho = prefix + "rho.pfm";
    e.mask = prefix + "mask.png";
    e.regions = prefix + "regions.png";
    e.depth = prefix + "depth.pfm";
    e.meta = prefix + "meta.json";
    if (background) {
      WritePngImage(dir / "composite.png", Composite(r.maps, *background));
      e.composite = prefix + "composite.png";
    }
    manifest.scenes[i] = std::move(e);
  });

  WriteManifest(out / "manifest.json", manifest);
  return manifest;
}

std::optional<RenderConfig> ReadMetaRender(const fs::path& matte_dir) {
  const fs::path meta = matte_dir / "meta.json";
  if (!fs::exists(meta)) return std::nullopt;
  const Json j = ReadJsonFile(meta);
  return RenderConfigFromJson(Member(j, "render", "meta"), "meta.render");
}

SolveResult CmdSolve(const RfaMaps& observed, const TriangleMesh& mesh,
                     const CameraIntrinsics& intr, const RenderConfig& render, const Pose& init,
                     const SolverOptions& opts) {
  if (std::isnan(render.background_depth)) {
    Fail(ErrorCode::kInvalidArgument,
         "solve: background depth unknown; pass it explicitly or provide meta.json next to the maps");
  }
  if (observed.width != intr.width || observed.height != intr.height) {
    Fail(ErrorCode::kInvalidArgument, "solve: observed maps do not match the intrinsics resolution");
  }
  return SolvePose(observed, mesh, intr, render, init, opts);
}

DatasetManifest CmdSolveManifest(const fs::path& manifest_path, const fs::path& out_manifest,
                                 const SolverOptions& opts, int threads,
                                 std::vector<SolveResult>* results) {
  DatasetManifest manifest = ReadManifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::map<std::string, std::size_t> mesh_index;
  std::vector<TriangleMesh> meshes;
  for (const ManifestEntry& e : manifest.scenes) {
    if (!e.init_pose) Fail(ErrorCode::kInvalidArgument, "manifest: scene '" + e.id + "' has no init_pose");
    if (mesh_index.emplace(e.mesh, meshes.size()).second) meshes.push_back(LoadMesh(base / e.mesh));
  }

  std::vector<SolveResult> solved(manifest.scenes.size());
  SolverOptions inner = opts;
  inner.threads = 1;
  ParallelFor(static_cast<int>(manifest.scenes.size()), threads > 0 ? threads : DefaultThreads(), [&](int i) {
    const ManifestEntry& e = manifest.scenes[i];
    const RfaMaps observed = ReadMaps(base / e.flow, base / e.rho, base / e.mask);
    RenderConfig render = e.render;
    render.threads = 1;
    solved[i] = CmdSolve(observed, meshes[mesh_index.at(e.mesh)], e.intrinsics, render, *e.init_pose, inner);
  });

  const fs::path out_dir = out_manifest.parent_path().empty() ? fs::path(".") : out_manifest.parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty()) p = RelativeTo(base / p, out_dir);
  };
  for (std::size_t i = 0; i < manifest.scenes.size(); ++i) {
    ManifestEntry& e = manifest.scenes[i];
    e.est_pose = solved[i].pose;
    for (std::string* p : {&e.mesh, &e.flow, &e.rho, &e.mask, &e.regions, &e.depth, &e.composite, &e.meta}) {
      rebase(*p);
    }
  }
  WriteManifest(out_manifest, manifest);
  if (results) *results = std::move(solved);
  return manifest;
}

MetricReport CmdEval(const fs::path& manifest_path, const fs::path& report_json,
                     const fs::path& table_csv, const EvalOptions& opts) {
  const DatasetManifest manifest = ReadManifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::map<std::string, std::size_t> mesh_index;
  std::vector<std::string> mesh_order;
  std::vector<TriangleMesh> meshes;
  for (const ManifestEntry& e : manifest.scenes) {
    if (!e.est_pose) Fail(ErrorCode::kInvalidArgument, "manifest: scene '" + e.id + "' has no est_pose");
    if (mesh_index.emplace(e.mesh, meshes.size()).second) {
      meshes.push_back(LoadMesh(base / e.mesh));
      mesh_order.push_back(e.mesh);
    }
  }
  std::vector<EvalInput> inputs;
  for (const ManifestEntry& e : manifest.scenes) {
    EvalInput in;
    in.id = e.id;
    in.mesh = &meshes[mesh_index.at(e.mesh)];
    in.gt = e.pose;
    in.est = *e.est_pose;
    in.intr = e.intrinsics;
    if (e.symmetry) in.symmetry = *e.symmetry;
    in.keypoints_3d = e.keypoints_3d;
    in.keypoints_2d = e.keypoints_2d;
    inputs.push_back(std::move(in));
  }
  const MetricReport report = Evaluate(inputs, opts);
  if (!report_json.empty()) WriteJsonFile(report_json, MetricReportToJson(report));

  if (!table_csv.empty()) {
    std::ostringstream csv;
    csv << "mesh,instances,add_01d,ar_vsd,ar_mssd,ar_mspd,ar,mae\n";
    std::vector<double> sums(6, 0.0);
    int mae_groups = 0;
    for (std::size_t g = 0; g < mesh_order.size(); ++g) {
      std::vector<InstanceMetrics> group;
      std::vector<double> distances, diameters;
      double mae = 0.0;
      int mae_count = 0;
      for (std::size_t i = 0; i < manifest.scenes.size(); ++i) {
        if (manifest.scenes[i].mesh != mesh_order[g]) continue;
        const InstanceMetrics& m = report.instances[i];
        group.push_back(m);
        distances.push_back(m.add_or_adds);
        diameters.push_back(m.diameter);
        if (m.mae) {
          mae += *m.mae;
          ++mae_count;
        }
      }
      const double add = AddRecall(distances, diameters, opts.add_threshold);
      const ArScore ar = ComputeAr(group);
      const double row[5] = {add, ar.vsd, ar.mssd, ar.mspd, ar.ar};
      for (int k = 0; k < 5; ++k) sums[k] += row[k];
      csv << mesh_order[g] << "," << group.size();
      for (double v : row) csv << "," << FormatFixed(v);
      if (mae_count > 0) {
        sums[5] += mae / mae_count;
        ++mae_groups;
        csv << "," << FormatFixed(mae / mae_count);
      } else {
        csv << ",";
      }
      csv << "\n";
    }
    const double groups = static_cast<double>(mesh_order.size());
    csv << "mean," << manifest.scenes.size();
    for (int k = 0; k < 5; ++k) csv << "," << FormatFixed(sums[k] / groups);
    csv << "," << (mae_groups > 0 ? FormatFixed(sums[5] / mae_groups) : std::string()) << "\n";
    std::ofstream f(table_csv, std::ios::binary);
    if (!(f << csv.str())) Fail(ErrorCode::kIo, "cannot write " + table_csv.string());
  }
  return report;
}

Json CmdEvalLosses(const LossReportInputs& in) {
  const RfaMaps gt = ReadMaps(in.gt_dir);
  const RfaMaps est = ReadMaps(in.est_dir);
  if (!gt.SameSize(est)) Fail(ErrorCode::kInvalidArgument, "losses: gt and est maps differ in size");
  const InterLoss inter = LossInter(gt, est, in.reduction);
  Json report = {{"reduction", in.reduction == Reduction::kMean ? "mean" : "sum"},
                 {"inter", InterLossToJson(inter)}};
  double total = inter.total();
  if (!in.background.empty()) {
    const Image bg = ReadPngImage(in.background);
    const double comp = LossComp(gt, est, bg, in.reduction);
    report["comp"] = comp;
    total += comp;
  }
  if (in.gt_pose || in.est_pose) {
    if (!in.gt_pose || !in.est_pose || in.mesh.empty()) {
      Fail(ErrorCode::kInvalidArgument, "losses: pose losses need a mesh and both poses");
    }
    const TriangleMesh mesh = LoadMesh(in.mesh);
    const CameraIntrinsics intr = in.intrinsics.value_or(DefaultIntrinsics(gt.width, gt.height));
    const CropBox crop{0.0, 0.0, double(intr.width), double(intr.height), 0.0};
    const PoseLoss pose = LossPose(in.gt_pose->rotation, in.est_pose->rotation, mesh.vertices(),
                                   EncodeSite(*in.gt_pose, intr, crop), EncodeSite(*in.est_pose, intr, crop));
    report["pose"] = {{"rot", pose.rot}, {"center", pose.center}, {"z", pose.z}, {"total", pose.total()}};
    total += pose.total();
  }
  report["total"] = total;
  return report;
}

Json CmdSolveRequest(const Json& req) {
  const std::string path = "request";
  RfaMaps observed;
  std::optional<Json> meta;
  if (req.contains("maps")) {
    const fs::path dir = String(req["maps"], path + ".maps");
    observed = ReadMaps(dir);
    if (fs::exists(dir / "meta.json")) meta = ReadJsonFile(dir / "meta.json");
  } else {
    observed = ReadMaps(String(Member(req, "flow", path), path + ".flow"),
                        String(Member(req, "rho", path), path + ".rho"),
                        String(Member(req, "mask", path), path + ".mask"));
  }

  CameraIntrinsics intr = DefaultIntrinsics(observed.width, observed.height);
  RenderConfig render = SceneConfig{}.render;
  if (meta) {
    render = RenderConfigFromJson(Member(*meta, "render", "meta"), "meta.render");
    if (meta->contains("config") && (*meta)["config"].contains("intrinsics")) {
      intr = IntrinsicsFromJson((*meta)["config"]["intrinsics"], "meta.config.intrinsics");
    }
  }
  if (req.contains("intrinsics")) intr = IntrinsicsFromJson(req["intrinsics"], path + ".intrinsics");
  if (req.contains("render")) {
    const double known_depth = render.background_depth;
    render = RenderConfigFromJson(req["render"], path + ".render", render);
    if (std::isnan(render.background_depth)) render.background_depth = known_depth;
  }

  SolverOptions opts;
  if (req.contains("solver")) opts = SolverOptionsFromJson(req["solver"], path + ".solver");
  const TriangleMesh mesh = LoadMesh(String(Member(req, "mesh", path), path + ".mesh"));

  Pose init;
  if (req.contains("init_pose")) {
    init = PoseFromJson(req["init_pose"], path + ".init_pose");
  } else if (req.contains("init_depth")) {
    init = InitFromMask(observed.mask, intr, Number(req["init_depth"], path + ".init_depth"));
  } else {
    FieldError(path, "either init_pose or init_depth is required");
  }
  const SolveResult result = CmdSolve(observed, mesh, intr, render, init, opts);
  Json out = SolveResultToJson(result);
  out["init_pose"] = PoseToJson(init);
  return out;
}

EvalOptions EvalOptionsFromJson(const Json& j, const std::string& path) {
  EvalOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) FieldError(path, "expected an object");
  if (j.contains("max_model_points")) o.max_model_points = Integer(j["max_model_points"], path + ".max_model_points");
  if (j.contains("add_threshold")) o.add_threshold = Number(j["add_threshold"], path + ".add_threshold");
  if (j.contains("symmetry_step")) o.symmetry_step = Number(j["symmetry_step"], path + ".symmetry_step");
  if (j.contains("threads")) o.threads = Integer(j["threads"], path + ".threads");
  auto grid = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    const Json& g = j[key];
    const std::string at = path + "." + key;
    if (!g.is_array() || g.empty()) FieldError(at, "expected a non-empty array of numbers");
    out = NumberArray(g, g.size(), at);
    for (double v : out) {
      if (!(v > 0.0)) FieldError(at, "thresholds must be positive");
    }
  };
  grid("vsd_tau", o.grids.vsd_tau);
  grid("vsd_theta", o.grids.vsd_theta);
  grid("mssd_theta", o.grids.mssd_theta);
  grid("mspd_theta", o.grids.mspd_theta);
  if (o.max_model_points < 0) FieldError(path + ".max_model_points", "must be >= 0");
  if (!(o.add_threshold > 0.0)) FieldError(path + ".add_threshold", "must be positive");
  if (!(o.symmetry_step > 0.0)) FieldError(path + ".symmetry_step", "must be positive");
  if (o.threads < 0) FieldError(path + ".threads", "must be >= 0");
  return o;
}

}  // namespace glasspose
