// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <functional>

#include "glasspose/error.hpp"
#include "glasspose/image.hpp"
#include "glasspose/pipeline.hpp"
#include "glasspose/serialization.hpp"
#include "test_util.hpp"

using namespace glasspose;

namespace {

// 0 when nothing was thrown.
int CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return int(e.code());
  }
  return 0;
}

std::string MessageOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("pfm layout is little endian, negative scale, bottom row first") {
  testing::TempDir dir("pfm");
  FloatMap map{3, 2, 1, {1, 2, 3, 4, 5, 6}};
  WritePfm(dir.path() / "a.pfm", map);
  const std::string bytes = testing::FileBytes(dir.path() / "a.pfm");
  const std::string header = "Pf\n3 2\n-1.0\n";
  REQUIRE(bytes.size() == header.size() + 6 * 4);
  CHECK(bytes.substr(0, header.size()) == header);
  const float expected[] = {4, 5, 6, 1, 2, 3};
  for (int i = 0; i < 6; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + header.size() + 4 * i);
    const std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
    float v;
    std::memcpy(&v, &bits, 4);
    CHECK(v == expected[i]);
  }
  const FloatMap back = ReadPfm(dir.path() / "a.pfm");
  CHECK(back.data == map.data);

  CounterRng rng(91);
  FloatMap color{5, 4, 3, {}};
  for (int i = 0; i < 60; ++i) color.data.push_back(float(rng.Uniform(-100, 100)));
  WritePfm(dir.path() / "c.pfm", color);
  const FloatMap cback = ReadPfm(dir.path() / "c.pfm");
  CHECK(cback.channels == 3);
  CHECK(cback.data == color.data);
  WritePfm(dir.path() / "c2.pfm", cback);
  CHECK(testing::FileBytes(dir.path() / "c.pfm") == testing::FileBytes(dir.path() / "c2.pfm"));
}

TEST_CASE("big endian pfm is read and malformed pfm is rejected") {
  testing::TempDir dir("pfmbe");
  {
    std::ofstream out(dir.path() / "be.pfm", std::ios::binary);
    out << "Pf\n2 1\n1.0\n";
    const unsigned char one_be[] = {0x3f, 0x80, 0, 0, 0x40, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(one_be), 8);
  }
  const FloatMap be = ReadPfm(dir.path() / "be.pfm");
  CHECK(be.data == std::vector<float>{1.0f, 2.0f});
  {
    std::ofstream out(dir.path() / "short.pfm", std::ios::binary);
    out << "Pf\n4 4\n-1\nabc";
  }
  CHECK(CodeOf([&] { ReadPfm(dir.path() / "short.pfm"); }) == int(ErrorCode::kParse));
  CHECK(CodeOf([&] { ReadPfm(dir.path() / "missing.pfm"); }) == int(ErrorCode::kIo));
}

TEST_CASE("png round trip and byte conversion") {
  testing::TempDir dir("png");
  CounterRng rng(92);
  std::vector<std::uint8_t> rgb(7 * 5 * 3);
  for (auto& v : rgb) v = std::uint8_t(rng.UniformIndex(256));
  WritePng8(dir.path() / "a.png", 7, 5, 3, rgb);
  int w, h, c;
  CHECK(ReadPng8(dir.path() / "a.png", w, h, c) == rgb);
  CHECK(w == 7);
  CHECK(h == 5);
  CHECK(c == 3);
  const Image img = ReadPngImage(dir.path() / "a.png");
  CHECK(img.data[4] == rgb[4] / 255.0);
  CHECK(ToByte(-1.0) == 0);
  CHECK(ToByte(2.0) == 255);
  CHECK(ToByte(0.5) == 128);
  WritePngImage(dir.path() / "b.png", img);
  CHECK(testing::FileBytes(dir.path() / "a.png") == testing::FileBytes(dir.path() / "b.png"));
  CHECK_THROWS_AS(WritePng8(dir.path() / "x.png", 2, 2, 2, rgb), Error);
}

TEST_CASE("resize keeps constants and corners") {
  Image img(4, 3, 1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) img.at(x, y, 0) = x + 10 * y;
  const Image same = Resize(img, 4, 3);
  CHECK(same == img);
  const Image big = Resize(img, 7, 5);
  CHECK(big.at(0, 0, 0) == 0.0);
  CHECK(std::abs(big.at(6, 4, 0) - 23.0) < 1e-12);
  CHECK(std::abs(big.at(3, 2, 0) - 11.5) < 1e-12);
  const Image flat = Resize(Image(5, 5, 3, 0.25), 2, 9);
  for (double v : flat.data) CHECK(v == 0.25);
}

TEST_CASE("matte directory round trip") {
  testing::TempDir dir("maps");
  CounterRng rng(93);
  RfaMaps m = testing::RandomMaps(rng, 9, 6);
  for (double& v : m.flow) v = float(v);
  for (double& v : m.rho) v = float(v);
  WriteMaps(dir.path(), m);
  const RfaMaps back = ReadMaps(dir.path());
  CHECK(back == m);
  WriteMaps(dir.path() / "again", back);
  for (const char* f : {"flow.pfm", "rho.pfm", "mask.png"}) {
    CHECK(testing::FileBytes(dir.path() / f) == testing::FileBytes(dir.path() / "again" / f));
  }
}

TEST_CASE("fnv-1a reference vectors") {
  CHECK(Fnv1aHex("") == "cbf29ce484222325");
  CHECK(Fnv1aHex("a") == "af63dc4c8601ec8c");
  CHECK(Fnv1aHex("foobar") == "85944171f73967e8");
}

TEST_CASE("json readers report the offending field path") {
  const Json pose = Json::parse(R"({"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0, 0, "x"]})");
  CHECK(MessageOf([&] { PoseFromJson(pose, "scene.pose"); }).find("scene.pose.translation[2]") != std::string::npos);
  const Json intr = Json::parse(R"({"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 10})");
  CHECK(MessageOf([&] { IntrinsicsFromJson(intr); }).find("intrinsics.height") != std::string::npos);
  const Json render = Json::parse(R"({"ior": 1.5, "tir_policy": "absorb"})");
  CHECK(CodeOf([&] { RenderConfigFromJson(render); }) == int(ErrorCode::kInvalidArgument));
  CHECK(MessageOf([&] { SolverOptionsFromJson(Json::parse(R"({"starts": 2})")); }).find("solver.starts") !=
        std::string::npos);
  const Json skew = Json::parse(R"({"rotation": [1,0.5,0, 0,1,0, 0,0,1], "translation": [0,0,1]})");
  CHECK(CodeOf([&] { PoseFromJson(skew); }) == int(ErrorCode::kInvalidArgument));
}

TEST_CASE("json value round trips") {
  CounterRng rng(94);
  const Pose p = testing::RandomPose(rng);
  const Pose back = PoseFromJson(PoseToJson(p));
  CHECK(back.rotation == p.rotation);
  CHECK(back.translation == p.translation);
  const CameraIntrinsics intr{500.5, 499.25, 319.5, 239.5, 640, 480};
  const CameraIntrinsics ib = IntrinsicsFromJson(IntrinsicsToJson(intr));
  CHECK(ib.fx == intr.fx);
  CHECK(ib.height == intr.height);
  RenderConfig cfg;
  cfg.ior = 1.33;
  cfg.background_depth = 2.5;
  cfg.tir_policy = TirPolicy::kReflect;
  cfg.max_bounces = 12;
  const RenderConfig cb = RenderConfigFromJson(RenderConfigToJson(cfg));
  CHECK(cb.ior == cfg.ior);
  CHECK(cb.background_depth == cfg.background_depth);
  CHECK(cb.tir_policy == cfg.tir_policy);
  CHECK(cb.max_bounces == cfg.max_bounces);
  SolverOptions so;
  so.multi_start = 3;
  so.w_mask = 4.5;
  so.optimizer = Optimizer::kFiniteDifference;
  const SolverOptions sb = SolverOptionsFromJson(SolverOptionsToJson(so));
  CHECK(sb.multi_start == 3);
  CHECK(sb.w_mask == 4.5);
  CHECK(sb.optimizer == Optimizer::kFiniteDifference);
  SymmetrySpec sym;
  sym.continuous.push_back({Vec3(0, 1, 0), Vec3(0, 0, 0.1)});
  const SymmetrySpec symb = SymmetryFromJson(SymmetryToJson(sym));
  REQUIRE(symb.continuous.size() == 1);
  CHECK(symb.continuous[0].point == sym.continuous[0].point);
}

TEST_CASE("manifest round trip is byte identical and validated") {
  testing::TempDir dir("manifest");
  DatasetManifest m;
  ManifestEntry e;
  e.id = "scene_00000";
  e.mesh = "meshes/box.obj";
  CounterRng rng(95);
  e.pose = testing::RandomPose(rng);
  e.init_pose = testing::RandomPose(rng);
  e.intrinsics = testing::SquareCamera(32, 40);
  e.render.background_depth = 1.5;
  e.keypoints_3d = {Vec3(0.1, 0.2, 0.3)};
  e.keypoints_2d = {Vec2(3.5, 4.25)};
  e.flow = "scene_00000/flow.pfm";
  e.rho = "scene_00000/rho.pfm";
  e.mask = "scene_00000/mask.png";
  e.regions = "scene_00000/regions.png";
  e.depth = "scene_00000/depth.pfm";
  e.meta = "scene_00000/meta.json";
  m.scenes.push_back(e);
  WriteManifest(dir.path() / "m.json", m);
  const DatasetManifest back = ReadManifest(dir.path() / "m.json");
  WriteManifest(dir.path() / "m2.json", back);
  CHECK(testing::FileBytes(dir.path() / "m.json") == testing::FileBytes(dir.path() / "m2.json"));
  CHECK(back.scenes[0].pose.translation == e.pose.translation);

  Json j = ManifestToJson(m);
  j["scenes"].push_back(j["scenes"][0]);
  CHECK(CodeOf([&] { ManifestFromJson(j); }) == int(ErrorCode::kInvalidArgument));
  j = ManifestToJson(m);
  j["scenes"][0]["flow"] = "/abs/flow.pfm";
  CHECK(MessageOf([&] { ManifestFromJson(j); }).find("scenes[0].flow") != std::string::npos);
  j = ManifestToJson(m);
  j["format"] = "other";
  CHECK(CodeOf([&] { ManifestFromJson(j); }) != 0);
}

TEST_CASE("malformed json files are parse errors") {
  testing::TempDir dir("badjson");
  std::ofstream(dir.path() / "bad.json") << "{\"a\": ";
  bool parse_error = false;
  try {
    ReadJsonFile(dir.path() / "bad.json");
  } catch (const Error& e) {
    parse_error = e.code() == ErrorCode::kParse;
  } catch (const Json::parse_error&) {
    parse_error = true;
  }
  CHECK(parse_error);
}
