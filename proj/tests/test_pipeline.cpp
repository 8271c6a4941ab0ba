// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "glasspose/error.hpp"
#include "glasspose/pipeline.hpp"
#include "glasspose/serialization.hpp"
#include "test_util.hpp"

using namespace glasspose;

namespace {

const char* kSceneFiles[] = {"flow.pfm", "rho.pfm", "mask.png", "regions.png", "depth.pfm", "meta.json"};

SceneConfig SmallScene(const fs::path& dir) {
  SaveObj(MakeIcosphere(2, 0.05), dir / "sphere.obj");
  SceneConfig cfg;
  cfg.mesh = dir / "sphere.obj";
  cfg.pose.translation = Vec3(0.005, -0.003, 0.5);
  cfg.intrinsics = DefaultIntrinsics(48, 32);
  cfg.region_count = 16;
  return cfg;
}

DatasetConfig SmallDataset(const fs::path& dir, int count) {
  SaveObj(MakeIcosphere(1, 0.05), dir / "ico.obj");
  SaveObj(MakeBox({0.08, 0.06, 0.04}), dir / "box.obj");
  DatasetConfig cfg;
  cfg.meshes = {dir / "ico.obj", dir / "box.obj"};
  cfg.intrinsics = DefaultIntrinsics(24, 24);
  cfg.count = count;
  cfg.seed = 5;
  cfg.region_count = 8;
  return cfg;
}

}  // namespace

TEST_CASE("render writes six files and reruns byte identically") {
  testing::TempDir dir("render");
  SceneConfig cfg = SmallScene(dir.path());
  cfg.out = dir.path() / "a";
  const Json meta = CmdRender(cfg, 1);
  CHECK(meta["warnings"].empty());
  CHECK(meta["config_hash"] == Fnv1aHex(SceneConfigToJson(cfg).dump()));
  CHECK(meta["render"]["background_depth"].get<double>() > 0.5);
  cfg.out = dir.path() / "b";
  CmdRender(cfg, 3);
  for (const char* f : kSceneFiles) {
    REQUIRE(fs::exists(dir.path() / "a" / f));
    CHECK(testing::FileBytes(dir.path() / "a" / f) == testing::FileBytes(dir.path() / "b" / f));
  }
  const RfaMaps maps = ReadMaps(dir.path() / "a");
  CHECK(maps.width == 48);
  CHECK(maps.height == 32);
}

TEST_CASE("scene outside the view warns about an empty render") {
  testing::TempDir dir("empty");
  SceneConfig cfg = SmallScene(dir.path());
  cfg.pose.translation = Vec3(5, 0, 0.5);
  cfg.out = dir.path() / "out";
  const Json meta = CmdRender(cfg, 1);
  REQUIRE(meta["warnings"].size() == 1);
  CHECK(meta["warnings"][0].get<std::string>().find("empty scene") != std::string::npos);
}

TEST_CASE("scene config parsing") {
  testing::TempDir dir("scenecfg");
  const Json j = Json::parse(R"({
    "mesh": "m.obj", "resolution": "64x48",
    "pose": {"rotation": [1,0,0,0,1,0,0,0,1], "translation": [0, 0, 1]},
    "render": {"ior": 1.4}, "seed": 3, "region_count": 12})");
  const SceneConfig cfg = SceneConfigFromJson(j, dir.path());
  CHECK(cfg.mesh == dir.path() / "m.obj");
  CHECK(cfg.intrinsics.width == 64);
  CHECK(cfg.intrinsics.fx == 64);
  CHECK(cfg.intrinsics.cy == 23.5);
  CHECK(cfg.render.ior == 1.4);
  CHECK(std::isnan(cfg.render.background_depth));
  CHECK(ParseResolution("1080x720") == std::pair{1080, 720});
  CHECK_THROWS_AS(ParseResolution("1080"), Error);
  Json bad = j;
  bad["region_count"] = 300;
  CHECK_THROWS_AS(SceneConfigFromJson(bad, dir.path()), Error);
}

TEST_CASE("composite over a background and size mismatch handling") {
  testing::TempDir dir("composite");
  SceneConfig cfg = SmallScene(dir.path());
  cfg.out = dir.path() / "m";
  CmdRender(cfg, 1);
  const Image bg(48, 32, 3, 0.5);
  WritePngImage(dir.path() / "bg.png", bg);
  CmdComposite(cfg.out, dir.path() / "bg.png", dir.path() / "c.png", false);
  const Image c = ReadPngImage(dir.path() / "c.png");
  const Image stored = ReadPngImage(dir.path() / "bg.png");
  const RfaMaps maps = ReadMaps(cfg.out);
  for (std::size_t i = 0; i < maps.PixelCount(); ++i) {
    if (maps.mask[i] == 0.0) CHECK(c.data[3 * i] == stored.data[3 * i]);
  }
  WritePngImage(dir.path() / "big.png", Image(96, 64, 3, 0.5));
  CHECK_THROWS_AS(CmdComposite(cfg.out, dir.path() / "big.png", dir.path() / "x.png", false), Error);
  CmdComposite(cfg.out, dir.path() / "big.png", dir.path() / "y.png", true);
  CHECK(testing::FileBytes(dir.path() / "y.png") == testing::FileBytes(dir.path() / "c.png"));
}

TEST_CASE("background content does not change the matte") {
  testing::TempDir dir("envinv");
  SceneConfig cfg = SmallScene(dir.path());
  WritePngImage(dir.path() / "dark.png", Image(48, 32, 3, 0.1));
  Image noisy(48, 32, 3);
  CounterRng rng(101);
  for (double& v : noisy.data) v = rng.Uniform();
  WritePngImage(dir.path() / "noisy.png", noisy);
  cfg.background = dir.path() / "dark.png";
  cfg.out = dir.path() / "a";
  CmdRender(cfg, 1);
  cfg.background = dir.path() / "noisy.png";
  cfg.out = dir.path() / "b";
  CmdRender(cfg, 1);
  for (const char* f : {"flow.pfm", "rho.pfm", "mask.png", "regions.png", "depth.pfm"}) {
    CHECK(testing::FileBytes(dir.path() / "a" / f) == testing::FileBytes(dir.path() / "b" / f));
  }
}

TEST_CASE("dataset generation is reproducible and writes a valid manifest") {
  testing::TempDir dir("gen");
  const DatasetConfig cfg = SmallDataset(dir.path(), 3);
  const DatasetManifest a = CmdGenDataset(cfg, dir.path() / "a", 1);
  CmdGenDataset(cfg, dir.path() / "b", 4);
  REQUIRE(a.scenes.size() == 3);
  CHECK(testing::FileBytes(dir.path() / "a" / "manifest.json") == testing::FileBytes(dir.path() / "b" / "manifest.json"));
  for (const ManifestEntry& e : a.scenes) {
    CHECK(fs::exists(dir.path() / "a" / e.flow));
    CHECK(testing::FileBytes(dir.path() / "a" / e.flow) == testing::FileBytes(dir.path() / "b" / e.flow));
    REQUIRE(e.init_pose.has_value());
    CHECK(RotationAngle(e.pose.rotation, e.init_pose->rotation) <= 15.0 * M_PI / 180.0 + 1e-9);
    CHECK(e.pose.translation.z() >= 0.7);
    CHECK(e.pose.translation.z() <= 0.9);
  }
  DatasetConfig other = cfg;
  other.seed = 6;
  const DatasetManifest c = CmdGenDataset(other, dir.path() / "c", 1);
  CHECK(c.scenes[0].pose.rotation != a.scenes[0].pose.rotation);
}

TEST_CASE("generated rotations are uniform") {
  testing::TempDir dir("genrot");
  DatasetConfig cfg = SmallDataset(dir.path(), 400);
  cfg.intrinsics = DefaultIntrinsics(4, 4);
  cfg.meshes.resize(1);
  const DatasetManifest m = CmdGenDataset(cfg, dir.path() / "out", 0);
  double sum = 0;
  for (const ManifestEntry& e : m.scenes) sum += RotationAngle(Mat3::Identity(), e.pose.rotation);
  const double mean_deg = sum / m.scenes.size() * 180.0 / M_PI;
  CHECK(std::abs(mean_deg - (90.0 + 360.0 / (M_PI * M_PI))) < 5.0);
}

TEST_CASE("solve and evaluate a small manifest") {
  testing::TempDir dir("solve");
  const DatasetConfig cfg = SmallDataset(dir.path(), 2);
  CmdGenDataset(cfg, dir.path() / "data", 1);
  SolverOptions opts;
  opts.multi_start = 2;
  opts.max_evaluations = 30;
  std::vector<SolveResult> results;
  const DatasetManifest solved =
      CmdSolveManifest(dir.path() / "data" / "manifest.json", dir.path() / "solved" / "manifest.json", opts, 1, &results);
  REQUIRE(results.size() == 2);
  for (const ManifestEntry& e : solved.scenes) {
    REQUIRE(e.est_pose.has_value());
    CHECK(fs::exists(dir.path() / "solved" / e.flow));
  }
  CmdSolveManifest(dir.path() / "data" / "manifest.json", dir.path() / "solved2" / "manifest.json", opts, 2);
  CHECK(testing::FileBytes(dir.path() / "solved" / "manifest.json") ==
        testing::FileBytes(dir.path() / "solved2" / "manifest.json"));

  const MetricReport r = CmdEval(dir.path() / "solved" / "manifest.json", dir.path() / "report.json",
                                 dir.path() / "table.csv", EvalOptions{});
  CHECK(r.instances.size() == 2);
  const std::string csv = testing::FileBytes(dir.path() / "table.csv");
  CHECK(csv.rfind("mesh,instances,add_01d,ar_vsd,ar_mssd,ar_mspd,ar,mae\n", 0) == 0);
  CHECK(csv.find("\nmean,") != std::string::npos);
  CHECK(ReadJsonFile(dir.path() / "report.json").contains("instances"));
}

TEST_CASE("perfect estimates evaluate to full recall") {
  testing::TempDir dir("evalgt");
  DatasetConfig cfg = SmallDataset(dir.path(), 20);
  DatasetManifest m = CmdGenDataset(cfg, dir.path() / "data", 0);
  for (ManifestEntry& e : m.scenes) e.est_pose = e.pose;
  WriteManifest(dir.path() / "data" / "gt.json", m);
  const MetricReport r = CmdEval(dir.path() / "data" / "gt.json", dir.path() / "r.json", dir.path() / "t.csv", EvalOptions{});
  CHECK(r.ar.ar == 1.0);
  CHECK(r.add_recall_01d == 1.0);
  CHECK_THROWS_AS(CmdEval(dir.path() / "data" / "manifest.json", dir.path() / "r2.json", dir.path() / "t2.csv", EvalOptions{}), Error);
}

TEST_CASE("single scene solve request") {
  testing::TempDir dir("request");
  SceneConfig cfg = SmallScene(dir.path());
  cfg.out = dir.path() / "obs";
  CmdRender(cfg, 1);
  Json req = {{"maps", cfg.out.string()},
              {"mesh", cfg.mesh.string()},
              {"init_pose", PoseToJson(cfg.pose)},
              {"solver", {{"multi_start", 1}, {"max_evaluations", 20}}}};
  const Json out = CmdSolveRequest(req);
  // The stored observation is single precision.
  CHECK(out["objective"].get<double>() < 1e-5);
  req.erase("init_pose");
  req["init_depth"] = 0.5;
  const Json from_mask = CmdSolveRequest(req);
  CHECK(std::abs(from_mask["init_pose"]["translation"][2].get<double>() - 0.5) < 1e-12);
  req.erase("init_depth");
  CHECK_THROWS_AS(CmdSolveRequest(req), Error);
}

TEST_CASE("loss report between two mattes") {
  testing::TempDir dir("losses");
  SceneConfig cfg = SmallScene(dir.path());
  cfg.out = dir.path() / "gt";
  CmdRender(cfg, 1);
  cfg.pose.translation.x() += 0.004;
  cfg.out = dir.path() / "est";
  CmdRender(cfg, 1);
  LossReportInputs in;
  in.gt_dir = dir.path() / "gt";
  in.est_dir = dir.path() / "gt";
  const Json same = CmdEvalLosses(in);
  CHECK(same["total"].get<double>() == 0.0);
  in.est_dir = dir.path() / "est";
  const Json diff = CmdEvalLosses(in);
  CHECK(diff["total"].get<double>() > 0.0);
  CHECK(diff["reduction"] == "mean");
}

TEST_CASE("self test passes") {
  bool passed = false;
  const Json report = RunSelfTest(passed);
  CHECK(passed);
  CHECK(report["checks"].size() >= 8);
}

TEST_CASE("region count above the vertex count is capped with a warning") {
  testing::TempDir dir("regioncap");
  SaveObj(MakeBox({0.1, 0.1, 0.1}), dir.path() / "box.obj");
  SceneConfig cfg;
  cfg.mesh = dir.path() / "box.obj";
  cfg.pose.translation = Vec3(0, 0, 0.5);
  cfg.intrinsics = DefaultIntrinsics(16, 16);
  cfg.out = dir.path() / "out";
  const Json meta = CmdRender(cfg, 1);
  CHECK(meta["anchors"].size() == 8);
  REQUIRE(meta["warnings"].size() == 1);
  CHECK(meta["warnings"][0].get<std::string>().find("region_count 64") != std::string::npos);
}
