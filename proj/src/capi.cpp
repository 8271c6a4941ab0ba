// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/glasspose.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "glasspose/compositing.hpp"
#include "glasspose/error.hpp"
#include "glasspose/image.hpp"
#include "glasspose/pipeline.hpp"

struct gp_mesh {
  glasspose::TriangleMesh mesh;
};
struct gp_maps {
  glasspose::RfaMaps maps;
};
struct gp_image {
  glasspose::Image image;
};

namespace {

using namespace glasspose;

thread_local std::string g_last_error;

gp_status Report(gp_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename Fn>
gp_status Guard(Fn&& fn) {
  try {
    fn();
    return GP_OK;
  } catch (const Error& e) {
    return Report(static_cast<gp_status>(e.code()), e.what());
  } catch (const nlohmann::json::parse_error& e) {
    return Report(GP_ERR_PARSE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return Report(GP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Report(GP_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return Report(GP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Report(GP_ERR_INTERNAL, e.what());
  } catch (...) {
    return Report(GP_ERR_INTERNAL, "unknown error");
  }
}

void Require(const void* p, const char* name) {
  if (p == nullptr) Fail(ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const Json& j) {
  if (out != nullptr) *out = CopyString(j.dump(2) + "\n");
}

Json ParseOptional(const char* text) {
  if (text == nullptr || *text == '\0') return Json::object();
  return Json::parse(text);
}

Pose ToPose(const gp_pose& p) {
  Pose pose;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = p.rotation[3 * r + c];
  pose.translation = Vec3(p.translation[0], p.translation[1], p.translation[2]);
  return pose;
}

void FromPose(const Pose& pose, gp_pose& p) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.rotation[3 * r + c] = pose.rotation(r, c);
  for (int k = 0; k < 3; ++k) p.translation[k] = pose.translation[k];
}

CameraIntrinsics ToIntrinsics(const gp_intrinsics& i) {
  return {i.fx, i.fy, i.cx, i.cy, i.width, i.height};
}

RenderConfig ToRenderConfig(const gp_render_config& c) {
  RenderConfig cfg;
  cfg.ior = c.ior;
  cfg.background_depth = c.background_depth;
  cfg.max_bounces = c.max_bounces;
  if (c.tir_policy != GP_TIR_TERMINATE && c.tir_policy != GP_TIR_REFLECT) {
    Fail(ErrorCode::kInvalidArgument, "render: unknown tir_policy");
  }
  cfg.tir_policy = c.tir_policy == GP_TIR_REFLECT ? TirPolicy::kReflect : TirPolicy::kTerminate;
  cfg.threads = c.threads;
  return cfg;
}

template <typename Handle, typename Make>
gp_status MakeHandle(Handle** out, Make&& make) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    *out = new Handle{make()};
  });
}

}  // namespace

extern "C" {

const char* gp_version(void) {
  static const std::string version = LibraryVersion();
  return version.c_str();
}

const char* gp_last_error(void) { return g_last_error.c_str(); }

void gp_string_free(char* s) { std::free(s); }

void gp_render_config_default(gp_render_config* cfg) {
  if (cfg == nullptr) return;
  const RenderConfig d;
  cfg->ior = d.ior;
  cfg->background_depth = d.background_depth;
  cfg->max_bounces = d.max_bounces;
  cfg->tir_policy = GP_TIR_TERMINATE;
  cfg->threads = 0;
}

void gp_pose_identity(gp_pose* pose) {
  if (pose != nullptr) FromPose(Pose{}, *pose);
}

gp_status gp_mesh_load(const char* path, gp_mesh** out) {
  return MakeHandle(out, [&] {
    Require(path, "path");
    return LoadMesh(path);
  });
}

gp_status gp_mesh_icosphere(int subdivisions, double radius, gp_mesh** out) {
  return MakeHandle(out, [&] { return MakeIcosphere(subdivisions, radius); });
}

gp_status gp_mesh_box(double sx, double sy, double sz, gp_mesh** out) {
  return MakeHandle(out, [&] { return MakeBox(Vec3(sx, sy, sz)); });
}

gp_status gp_mesh_cylinder(double radius, double height, int segments, gp_mesh** out) {
  return MakeHandle(out, [&] { return MakeCylinder(radius, height, segments); });
}

gp_status gp_mesh_info(const gp_mesh* mesh, size_t* vertices, size_t* faces, double* diameter,
                       int* closed) {
  return Guard([&] {
    Require(mesh, "mesh");
    if (vertices) *vertices = mesh->mesh.vertices().size();
    if (faces) *faces = mesh->mesh.faces().size();
    if (diameter) *diameter = mesh->mesh.diameter();
    if (closed) *closed = mesh->mesh.is_closed() ? 1 : 0;
  });
}

gp_status gp_mesh_save_obj(const gp_mesh* mesh, const char* path) {
  return Guard([&] {
    Require(mesh, "mesh");
    Require(path, "path");
    SaveObj(mesh->mesh, path);
  });
}

void gp_mesh_free(gp_mesh* mesh) { delete mesh; }

gp_status gp_render_rfa(const gp_mesh* mesh, const gp_pose* pose, const gp_intrinsics* intrinsics,
                        const gp_render_config* cfg, gp_maps** out) {
  return MakeHandle(out, [&] {
    Require(mesh, "mesh");
    Require(pose, "pose");
    Require(intrinsics, "intrinsics");
    Require(cfg, "cfg");
    return RenderRfa(mesh->mesh, ToPose(*pose), ToIntrinsics(*intrinsics), ToRenderConfig(*cfg));
  });
}

gp_status gp_maps_size(const gp_maps* maps, int* width, int* height) {
  return Guard([&] {
    Require(maps, "maps");
    if (width) *width = maps->maps.width;
    if (height) *height = maps->maps.height;
  });
}

const double* gp_maps_flow(const gp_maps* maps) { return maps ? maps->maps.flow.data() : nullptr; }
const double* gp_maps_rho(const gp_maps* maps) { return maps ? maps->maps.rho.data() : nullptr; }
const double* gp_maps_mask(const gp_maps* maps) { return maps ? maps->maps.mask.data() : nullptr; }

gp_status gp_maps_read(const char* dir, gp_maps** out) {
  return MakeHandle(out, [&] {
    Require(dir, "dir");
    return ReadMaps(dir);
  });
}

gp_status gp_maps_write(const gp_maps* maps, const char* dir) {
  return Guard([&] {
    Require(maps, "maps");
    Require(dir, "dir");
    std::filesystem::create_directories(dir);
    WriteMaps(dir, maps->maps);
  });
}

void gp_maps_free(gp_maps* maps) { delete maps; }

gp_status gp_image_read_png(const char* path, gp_image** out) {
  return MakeHandle(out, [&] {
    Require(path, "path");
    return ReadPngImage(path);
  });
}

gp_status gp_image_write_png(const gp_image* image, const char* path) {
  return Guard([&] {
    Require(image, "image");
    Require(path, "path");
    WritePngImage(path, image->image);
  });
}

gp_status gp_image_size(const gp_image* image, int* width, int* height, int* channels) {
  return Guard([&] {
    Require(image, "image");
    if (width) *width = image->image.width;
    if (height) *height = image->image.height;
    if (channels) *channels = image->image.channels;
  });
}

const double* gp_image_data(const gp_image* image) {
  return image ? image->image.data.data() : nullptr;
}

void gp_image_free(gp_image* image) { delete image; }

gp_status gp_composite(const gp_maps* maps, const gp_image* background, gp_image** out) {
  return MakeHandle(out, [&] {
    Require(maps, "maps");
    Require(background, "background");
    return Composite(maps->maps, background->image);
  });
}

gp_status gp_solve_pose(const gp_maps* observed, const gp_mesh* mesh,
                        const gp_intrinsics* intrinsics, const gp_render_config* cfg,
                        const gp_pose* init, const char* solver_options_json, gp_pose* out_pose,
                        char** result_json) {
  return Guard([&] {
    Require(observed, "observed");
    Require(mesh, "mesh");
    Require(intrinsics, "intrinsics");
    Require(cfg, "cfg");
    Require(init, "init");
    const SolverOptions opts = SolverOptionsFromJson(ParseOptional(solver_options_json));
    const SolveResult r = CmdSolve(observed->maps, mesh->mesh, ToIntrinsics(*intrinsics),
                                   ToRenderConfig(*cfg), ToPose(*init), opts);
    if (out_pose) FromPose(r.pose, *out_pose);
    Emit(result_json, SolveResultToJson(r));
  });
}

gp_status gp_cmd_render(const char* scene_json, const char* base_dir, int threads, char** out_json) {
  return Guard([&] {
    Require(scene_json, "scene_json");
    const SceneConfig cfg = SceneConfigFromJson(Json::parse(scene_json), base_dir ? base_dir : "");
    Emit(out_json, CmdRender(cfg, threads));
  });
}

gp_status gp_cmd_composite(const char* matte_dir, const char* background, const char* out_png,
                           int resize) {
  return Guard([&] {
    Require(matte_dir, "matte_dir");
    Require(background, "background");
    Require(out_png, "out_png");
    CmdComposite(matte_dir, background, out_png, resize != 0);
  });
}

gp_status gp_cmd_gen_dataset(const char* dataset_json, const char* base_dir, const char* out_dir,
                             int threads, char** out_json) {
  return Guard([&] {
    Require(dataset_json, "dataset_json");
    Require(out_dir, "out_dir");
    const DatasetConfig cfg = DatasetConfigFromJson(Json::parse(dataset_json), base_dir ? base_dir : "");
    Emit(out_json, ManifestToJson(CmdGenDataset(cfg, out_dir, threads)));
  });
}

gp_status gp_cmd_solve(const char* request_json, char** out_json) {
  return Guard([&] {
    Require(request_json, "request_json");
    Emit(out_json, CmdSolveRequest(Json::parse(request_json)));
  });
}

gp_status gp_cmd_solve_manifest(const char* manifest, const char* out_manifest,
                                const char* solver_options_json, int threads, char** out_json) {
  return Guard([&] {
    Require(manifest, "manifest");
    Require(out_manifest, "out_manifest");
    const SolverOptions opts = SolverOptionsFromJson(ParseOptional(solver_options_json));
    std::vector<SolveResult> results;
    const DatasetManifest m = CmdSolveManifest(manifest, out_manifest, opts, threads, &results);
    Json list = Json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      Json r = SolveResultToJson(results[i]);
      r["id"] = m.scenes[i].id;
      list.push_back(std::move(r));
    }
    Emit(out_json, Json{{"results", list}});
  });
}

gp_status gp_cmd_eval(const char* manifest, const char* report_json, const char* table_csv,
                      const char* eval_options_json, char** out_json) {
  return Guard([&] {
    Require(manifest, "manifest");
    const EvalOptions opts = EvalOptionsFromJson(ParseOptional(eval_options_json));
    const MetricReport report =
        CmdEval(manifest, report_json ? report_json : "", table_csv ? table_csv : "", opts);
    Emit(out_json, MetricReportToJson(report));
  });
}

gp_status gp_cmd_eval_losses(const char* request_json, char** out_json) {
  return Guard([&] {
    Require(request_json, "request_json");
    const Json req = Json::parse(request_json);
    LossReportInputs in;
    in.gt_dir = req.at("gt").get<std::string>();
    in.est_dir = req.at("est").get<std::string>();
    if (req.contains("background")) in.background = req["background"].get<std::string>();
    if (req.contains("mesh")) in.mesh = req["mesh"].get<std::string>();
    if (req.contains("gt_pose")) in.gt_pose = PoseFromJson(req["gt_pose"], "request.gt_pose");
    if (req.contains("est_pose")) in.est_pose = PoseFromJson(req["est_pose"], "request.est_pose");
    if (req.contains("intrinsics")) in.intrinsics = IntrinsicsFromJson(req["intrinsics"], "request.intrinsics");
    if (req.value("reduction", std::string("mean")) == "sum") in.reduction = Reduction::kSum;
    Emit(out_json, CmdEvalLosses(in));
  });
}

gp_status gp_selftest(char** out_json, int* passed) {
  return Guard([&] {
    bool ok = false;
    const Json report = RunSelfTest(ok);
    if (passed) *passed = ok ? 1 : 0;
    Emit(out_json, report);
  });
}

}  // extern "C"
