// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "glasspose/glasspose.h"

namespace {

using Json = nlohmann::json;

constexpr const char* kUnits =
    "All lengths (mesh coordinates, translations, depths, background plane) are in meters. "
    "Poses map object coordinates into the camera frame (x right, y down, z forward).";

struct Failure {
  int code;
  std::string message;
};

void Check(gp_status status) {
  if (status != GP_OK) throw Failure{static_cast<int>(status), gp_last_error()};
}

Json ReadJson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{GP_ERR_IO, "cannot open " + path};
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Failure{GP_ERR_PARSE, path + ": " + e.what()};
  }
}

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  gp_string_free(s);
  return out;
}

void Output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!(out << text)) throw Failure{GP_ERR_IO, "cannot write " + path};
}

std::string Directory(const std::string& file) {
  const auto slash = file.find_last_of('/');
  return slash == std::string::npos ? "." : file.substr(0, slash);
}

/// Flags shared by render and gen-dataset; they override config fields.
struct SceneFlags {
  std::string mesh, pose, intrinsics, resolution, background;
  std::optional<double> ior, background_depth;
  std::optional<int> max_bounces, regions;
  std::string tir_policy;
  std::optional<std::uint64_t> seed;

  void Add(CLI::App* app) {
    app->add_option("--mesh", mesh, "Mesh file (.obj or ASCII .ply), meters");
    app->add_option("--intrinsics", intrinsics, "Intrinsics JSON {fx, fy, cx, cy, width, height}");
    app->add_option("--resolution", resolution,
                    "WIDTHxHEIGHT with focal = width and centered principal point (default 1080x720)");
    app->add_option("--ior", ior, "Index of refraction (default 1.5)");
    app->add_option("--background-depth", background_depth,
                    "Background plane depth in meters (default: one diameter behind the object)");
    app->add_option("--max-bounces", max_bounces, "Interface events per path (default 8)");
    app->add_option("--tir-policy", tir_policy, "terminate|reflect (default terminate)");
    app->add_option("--regions", regions, "Surface region count K (default 64, at most 255)");
    app->add_option("--seed", seed, "Random seed");
  }

  void Apply(Json& cfg, const std::string& mesh_key) const {
    if (!mesh.empty()) cfg[mesh_key] = mesh;
    if (!pose.empty()) cfg["pose"] = ReadJson(pose);
    if (!intrinsics.empty()) cfg["intrinsics"] = ReadJson(intrinsics);
    if (!resolution.empty()) {
      cfg.erase("intrinsics");
      cfg["resolution"] = resolution;
    }
    if (!background.empty()) cfg["background"] = background;
    Json& render = cfg["render"];
    if (!render.is_object()) render = Json::object();
    if (ior) render["ior"] = *ior;
    if (background_depth) render["background_depth"] = *background_depth;
    if (max_bounces) render["max_bounces"] = *max_bounces;
    if (!tir_policy.empty()) render["tir_policy"] = tir_policy;
    if (regions) cfg["region_count"] = *regions;
    if (seed) cfg["seed"] = *seed;
  }
};

/// Solver flags; they override fields of an optional solver JSON file.
struct SolverFlags {
  std::string file, optimizer;
  std::optional<int> starts, max_evals;
  std::optional<double> w_flow, w_rho, w_mask, tolerance;
  std::optional<std::uint64_t> seed;

  void Add(CLI::App* app) {
    app->add_option("--solver", file, "Solver options JSON");
    app->add_option("--optimizer", optimizer, "nelder-mead|finite-difference-gradient");
    app->add_option("--starts", starts, "Total starts including the init pose (default 8)");
    app->add_option("--max-evals", max_evals, "Objective evaluations per start (default 400)");
    app->add_option("--w-flow", w_flow, "Flow weight (default 1)");
    app->add_option("--w-rho", w_rho, "Attenuation weight (default 1)");
    app->add_option("--w-mask", w_mask, "Mask weight (default 10)");
    app->add_option("--tolerance", tolerance, "Local convergence tolerance (default 1e-6)");
    app->add_option("--seed", seed, "Seed for the perturbed starts");
  }

  Json Build(int threads) const {
    Json j = file.empty() ? Json::object() : ReadJson(file);
    if (!optimizer.empty()) j["optimizer"] = optimizer;
    if (starts) j["multi_start"] = *starts;
    if (max_evals) j["max_evaluations"] = *max_evals;
    if (w_flow) j["w_flow"] = *w_flow;
    if (w_rho) j["w_rho"] = *w_rho;
    if (w_mask) j["w_mask"] = *w_mask;
    if (tolerance) j["tolerance"] = *tolerance;
    if (seed) j["seed"] = *seed;
    if (threads > 0) j["threads"] = threads;
    return j;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("glasspose ") + gp_version() +
               ": refractive matte rendering, compositing and pose refinement for transparent "
               "objects.\n" + kUnits};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gp_version()));
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = GLASSPOSE_THREADS or hardware concurrency); results do not "
                 "depend on it")
      ->check(CLI::NonNegativeNumber);

  // render
  auto* render = app.add_subcommand("render", "Render flow, attenuation, mask, regions and depth");
  std::string render_config, render_out;
  SceneFlags render_flags;
  render->add_option("--config", render_config, "Scene JSON {mesh, pose, intrinsics|resolution, render, seed}");
  render->add_option("--pose", render_flags.pose, "Pose JSON {rotation[9] row-major, translation[3] meters}");
  render_flags.Add(render);
  render->add_option("--out", render_out, "Output directory")->required();

  // composite
  auto* composite = app.add_subcommand("composite", "Composite a matte over a background image");
  std::string matte_dir, composite_bg, composite_out;
  bool composite_resize = false;
  composite->add_option("--matte", matte_dir, "Matte directory (flow.pfm, rho.pfm, mask.png)")->required();
  composite->add_option("--background", composite_bg, "Background PNG")->required();
  composite->add_option("--out", composite_out, "Output PNG")->required();
  composite->add_flag("--resize", composite_resize, "Resample the background to the matte size");

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "Render a dataset of random poses with a manifest");
  std::string gen_config, gen_out;
  std::optional<int> gen_count;
  SceneFlags gen_flags;
  gen->add_option("--config", gen_config,
                  "Dataset JSON {mesh|meshes, intrinsics|resolution, render, count, seed, "
                  "translation_min, translation_max, init_rotation_deg, init_translation, "
                  "background, symmetry}");
  gen->add_option("--count", gen_count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--background", gen_flags.background, "Background PNG for composites");
  gen_flags.Add(gen);
  gen->add_option("--out", gen_out, "Output directory")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Recover a pose by render-and-compare");
  std::string maps, flow, rho, mask, solve_mesh, solve_intr, init_pose, solve_out, manifest, report;
  std::optional<double> init_depth, solve_ior, solve_bg_depth;
  SolverFlags solver_flags;
  solve->add_option("--maps", maps, "Observed matte directory (meta.json there supplies render parameters)");
  solve->add_option("--flow", flow, "Observed flow PFM");
  solve->add_option("--rho", rho, "Observed attenuation PFM");
  solve->add_option("--mask", mask, "Observed mask PNG");
  solve->add_option("--mesh", solve_mesh, "Mesh file, meters");
  solve->add_option("--intrinsics", solve_intr, "Intrinsics JSON");
  solve->add_option("--ior", solve_ior, "Index of refraction");
  solve->add_option("--background-depth", solve_bg_depth, "Background plane depth, meters");
  solve->add_option("--init", init_pose, "Init pose JSON");
  solve->add_option("--init-depth", init_depth,
                    "Heuristic init: back-project the mask centroid to this depth (meters), "
                    "identity rotation");
  solve->add_option("--manifest", manifest, "Solve every scene of a manifest from its init_pose");
  solve->add_option("--report", report, "With --manifest: per-scene SolveResult JSON");
  solver_flags.Add(solve);
  solve->add_option("--out", solve_out, "SolveResult JSON (or the solved manifest with --manifest)");

  // eval
  auto* eval = app.add_subcommand("eval", "Pose metrics over a manifest, or matte losses");
  std::string eval_manifest, eval_out, eval_csv, eval_options;
  bool losses = false, sum = false;
  std::string gt_dir, est_dir, loss_bg, loss_mesh, gt_pose, est_pose, loss_intr;
  eval->add_option("--manifest", eval_manifest, "Manifest with pose and est_pose per scene");
  eval->add_option("--csv", eval_csv, "Per-mesh table with a mean row");
  eval->add_option("--options", eval_options,
                   "Eval options JSON {max_model_points, add_threshold, symmetry_step, vsd_tau, vsd_theta, mssd_theta, mspd_theta}");
  eval->add_flag("--losses", losses, "Report matte/pose losses between two matte directories");
  eval->add_option("--gt", gt_dir, "With --losses: ground-truth matte directory");
  eval->add_option("--est", est_dir, "With --losses: estimated matte directory");
  eval->add_option("--background", loss_bg, "With --losses: background PNG for the compositing loss");
  eval->add_option("--mesh", loss_mesh, "With --losses: mesh for the pose losses");
  eval->add_option("--gt-pose", gt_pose, "With --losses: ground-truth pose JSON");
  eval->add_option("--est-pose", est_pose, "With --losses: estimated pose JSON");
  eval->add_option("--intrinsics", loss_intr, "With --losses: intrinsics JSON");
  eval->add_flag("--sum", sum, "With --losses: literal L1 sums instead of means");
  eval->add_option("--out", eval_out, "Report JSON (stdout when omitted)");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the analytic oracle checks");
  std::string selftest_out;
  selftest->add_option("--out", selftest_out, "Report JSON (stdout when omitted)");

  // gen-mesh
  auto* gen_mesh = app.add_subcommand("gen-mesh", "Write a procedural closed mesh as OBJ");
  std::string shape = "icosphere", mesh_out;
  double radius = 0.1, height = 0.2;
  int subdivisions = 3, segments = 64;
  std::vector<double> size{0.2, 0.2, 0.2};
  gen_mesh->add_option("--shape", shape, "icosphere|box|cylinder")
      ->check(CLI::IsMember({"icosphere", "box", "cylinder"}));
  gen_mesh->add_option("--radius", radius, "Sphere or cylinder radius, meters");
  gen_mesh->add_option("--height", height, "Cylinder height, meters");
  gen_mesh->add_option("--subdivisions", subdivisions, "Icosphere subdivisions");
  gen_mesh->add_option("--segments", segments, "Cylinder segments");
  gen_mesh->add_option("--size", size, "Box size x y z, meters")->expected(3);
  gen_mesh->add_option("--out", mesh_out, "Output OBJ")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) {
      Json cfg = render_config.empty() ? Json::object() : ReadJson(render_config);
      render_flags.Apply(cfg, "mesh");
      cfg["out"] = render_out;
      // Flag paths are relative to the working directory, config paths to
      // the config file; absolutize the flag-provided ones.
      std::string base = render_config.empty() ? "." : Directory(render_config);
      if (!render_config.empty()) {
        if (!render_flags.mesh.empty()) cfg["mesh"] = std::filesystem::absolute(render_flags.mesh).string();
        cfg["out"] = std::filesystem::absolute(render_out).string();
      }
      char* meta = nullptr;
      Check(gp_cmd_render(cfg.dump().c_str(), base.c_str(), threads, &meta));
      const Json m = Json::parse(TakeString(meta));
      for (const auto& w : m["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    } else if (composite->parsed()) {
      Check(gp_cmd_composite(matte_dir.c_str(), composite_bg.c_str(), composite_out.c_str(),
                             composite_resize ? 1 : 0));
    } else if (gen->parsed()) {
      Json cfg = gen_config.empty() ? Json::object() : ReadJson(gen_config);
      gen_flags.Apply(cfg, "mesh");
      if (gen_count) cfg["count"] = *gen_count;
      std::string base = gen_config.empty() ? "." : Directory(gen_config);
      if (!gen_config.empty()) {
        if (!gen_flags.mesh.empty()) cfg["mesh"] = std::filesystem::absolute(gen_flags.mesh).string();
        if (!gen_flags.background.empty()) {
          cfg["background"] = std::filesystem::absolute(gen_flags.background).string();
        }
      }
      if (!gen_flags.mesh.empty()) cfg.erase("meshes");
      char* out = nullptr;
      Check(gp_cmd_gen_dataset(cfg.dump().c_str(), base.c_str(), gen_out.c_str(), threads, &out));
      gp_string_free(out);
    } else if (solve->parsed()) {
      const Json solver = solver_flags.Build(threads);
      if (!manifest.empty()) {
        if (solve_out.empty()) throw Failure{GP_ERR_INVALID_ARGUMENT, "solve --manifest needs --out"};
        char* out = nullptr;
        Check(gp_cmd_solve_manifest(manifest.c_str(), solve_out.c_str(), solver.dump().c_str(),
                                    threads, &out));
        const std::string results = TakeString(out);
        if (!report.empty()) Output(results, report);
      } else {
        Json req;
        if (!maps.empty()) {
          req["maps"] = maps;
        } else {
          req["flow"] = flow;
          req["rho"] = rho;
          req["mask"] = mask;
        }
        if (solve_mesh.empty()) throw Failure{GP_ERR_INVALID_ARGUMENT, "solve needs --mesh"};
        req["mesh"] = solve_mesh;
        if (!solve_intr.empty()) req["intrinsics"] = ReadJson(solve_intr);
        if (solve_ior || solve_bg_depth) {
          req["render"] = Json::object();
          if (solve_ior) req["render"]["ior"] = *solve_ior;
          if (solve_bg_depth) req["render"]["background_depth"] = *solve_bg_depth;
        }
        if (!init_pose.empty()) req["init_pose"] = ReadJson(init_pose);
        if (init_depth) req["init_depth"] = *init_depth;
        req["solver"] = solver;
        char* out = nullptr;
        Check(gp_cmd_solve(req.dump().c_str(), &out));
        Output(TakeString(out), solve_out);
      }
    } else if (eval->parsed()) {
      char* out = nullptr;
      if (losses) {
        if (gt_dir.empty() || est_dir.empty()) {
          throw Failure{GP_ERR_INVALID_ARGUMENT, "eval --losses needs --gt and --est"};
        }
        Json req = {{"gt", gt_dir}, {"est", est_dir}, {"reduction", sum ? "sum" : "mean"}};
        if (!loss_bg.empty()) req["background"] = loss_bg;
        if (!loss_mesh.empty()) req["mesh"] = loss_mesh;
        if (!gt_pose.empty()) req["gt_pose"] = ReadJson(gt_pose);
        if (!est_pose.empty()) req["est_pose"] = ReadJson(est_pose);
        if (!loss_intr.empty()) req["intrinsics"] = ReadJson(loss_intr);
        Check(gp_cmd_eval_losses(req.dump().c_str(), &out));
        Output(TakeString(out), eval_out);
      } else {
        if (eval_manifest.empty()) throw Failure{GP_ERR_INVALID_ARGUMENT, "eval needs --manifest"};
        Json options = eval_options.empty() ? Json::object() : ReadJson(eval_options);
        if (threads > 0) options["threads"] = threads;
        Check(gp_cmd_eval(eval_manifest.c_str(), eval_out.empty() ? nullptr : eval_out.c_str(),
                          eval_csv.empty() ? nullptr : eval_csv.c_str(), options.dump().c_str(), &out));
        const std::string text = TakeString(out);
        if (eval_out.empty()) std::cout << text;
      }
    } else if (selftest->parsed()) {
      char* out = nullptr;
      int passed = 0;
      Check(gp_selftest(&out, &passed));
      Output(TakeString(out), selftest_out);
      std::cerr << (passed ? "selftest: pass\n" : "selftest: FAIL\n");
      return passed ? 0 : 1;
    } else if (gen_mesh->parsed()) {
      gp_mesh* mesh = nullptr;
      if (shape == "icosphere") {
        Check(gp_mesh_icosphere(subdivisions, radius, &mesh));
      } else if (shape == "box") {
        Check(gp_mesh_box(size[0], size[1], size[2], &mesh));
      } else {
        Check(gp_mesh_cylinder(radius, height, segments, &mesh));
      }
      const gp_status status = gp_mesh_save_obj(mesh, mesh_out.c_str());
      gp_mesh_free(mesh);
      Check(status);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  return 0;
}
