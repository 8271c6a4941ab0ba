// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/serialization.hpp"

#include <algorithm>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glasspose/error.hpp"
#include "glasspose/image.hpp"
#include "json_fields.hpp"

namespace glasspose {

using namespace json_fields;

Json Vec3ToJson(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 Vec3FromJson(const Json& j, const std::string& path) {
  const auto a = NumberArray(j, 3, path);
  return {a[0], a[1], a[2]};
}

Json PoseToJson(const Pose& pose) {
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation(r, c));
  return {{"rotation", rot}, {"translation", Vec3ToJson(pose.translation)}};
}

Pose PoseFromJson(const Json& j, const std::string& path) {
  Pose pose;
  const auto rot = NumberArray(Member(j, "rotation", path), 9, path + ".rotation");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = rot[3 * r + c];
  pose.translation = Vec3FromJson(Member(j, "translation", path), path + ".translation");
  if (!pose.IsValid(1e-6)) FieldError(path + ".rotation", "not a proper rotation matrix");
  return pose;
}

Json IntrinsicsToJson(const CameraIntrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
          {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

CameraIntrinsics IntrinsicsFromJson(const Json& j, const std::string& path) {
  CameraIntrinsics intr;
  intr.fx = Number(Member(j, "fx", path), path + ".fx");
  intr.fy = Number(Member(j, "fy", path), path + ".fy");
  intr.cx = Number(Member(j, "cx", path), path + ".cx");
  intr.cy = Number(Member(j, "cy", path), path + ".cy");
  intr.width = Integer(Member(j, "width", path), path + ".width");
  intr.height = Integer(Member(j, "height", path), path + ".height");
  try {
    intr.Validate();
  } catch (const Error& e) {
    FieldError(path, e.what());
  }
  return intr;
}

Json RenderConfigToJson(const RenderConfig& cfg) {
  Json j = {{"ior", cfg.ior},
            {"max_bounces", cfg.max_bounces},
            {"tir_policy", ToString(cfg.tir_policy)},
            {"attenuation_model", "fresnel-unpolarized-interfaces-only"}};
  j["background_depth"] = std::isfinite(cfg.background_depth) ? Json(cfg.background_depth) : Json(nullptr);
  return j;
}

RenderConfig RenderConfigFromJson(const Json& j, const std::string& path, RenderConfig base) {
  RenderConfig cfg = base;
  cfg.ior = Optional(j, "ior", path, cfg.ior, Number);
  cfg.background_depth = Optional(j, "background_depth", path, std::nan(""), Number);
  cfg.max_bounces = Optional(j, "max_bounces", path, cfg.max_bounces, Integer);
  cfg.tir_policy = Optional(j, "tir_policy", path, cfg.tir_policy, [](const Json& v, const std::string& p) {
    if (!v.is_string()) FieldError(p, "expected \"terminate\" or \"reflect\"");
    try {
      return TirPolicyFromString(v.get<std::string>());
    } catch (const Error& e) {
      FieldError(p, e.what());
    }
  });
  if (!(cfg.ior >= 1.0)) FieldError(path + ".ior", "must be >= 1");
  if (cfg.max_bounces < 2) FieldError(path + ".max_bounces", "must be >= 2");
  if (!std::isnan(cfg.background_depth) && !(cfg.background_depth > 0.0)) {
    FieldError(path + ".background_depth", "must be positive");
  }
  return cfg;
}

Json SolverOptionsToJson(const SolverOptions& o) {
  return {{"w_flow", o.w_flow},
          {"w_rho", o.w_rho},
          {"w_mask", o.w_mask},
          {"optimizer", ToString(o.optimizer)},
          {"max_evaluations", o.max_evaluations},
          {"tolerance", o.tolerance},
          {"multi_start", o.multi_start},
          {"perturb_rotation_deg", o.perturb_rotation_deg},
          {"perturb_translation", o.perturb_translation},
          {"seed", o.seed}};
}

SolverOptions SolverOptionsFromJson(const Json& j, const std::string& path, SolverOptions base) {
  SolverOptions o = base;
  if (j.is_object()) {
    static const char* const kKeys[] = {"w_flow", "w_rho", "w_mask", "optimizer", "max_evaluations", "tolerance",
                                        "multi_start", "perturb_rotation_deg", "perturb_translation", "seed",
                                        "threads"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        FieldError(path + "." + key, "unknown solver option");
      }
    }
  }
  o.w_flow = Optional(j, "w_flow", path, o.w_flow, Number);
  o.w_rho = Optional(j, "w_rho", path, o.w_rho, Number);
  o.w_mask = Optional(j, "w_mask", path, o.w_mask, Number);
  o.optimizer = Optional(j, "optimizer", path, o.optimizer, [](const Json& v, const std::string& p) {
    if (!v.is_string()) FieldError(p, "expected an optimizer name");
    try {
      return OptimizerFromString(v.get<std::string>());
    } catch (const Error& e) {
      FieldError(p, e.what());
    }
  });
  o.max_evaluations = Optional(j, "max_evaluations", path, o.max_evaluations, Integer);
  o.tolerance = Optional(j, "tolerance", path, o.tolerance, Number);
  o.multi_start = Optional(j, "multi_start", path, o.multi_start, Integer);
  o.perturb_rotation_deg = Optional(j, "perturb_rotation_deg", path, o.perturb_rotation_deg, Number);
  o.perturb_translation = Optional(j, "perturb_translation", path, o.perturb_translation, Number);
  o.seed = Optional(j, "seed", path, o.seed, [](const Json& v, const std::string& p) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) FieldError(p, "expected an integer");
    return v.get<std::uint64_t>();
  });
  o.threads = Optional(j, "threads", path, o.threads, Integer);
  try {
    o.Validate();
  } catch (const Error& e) {
    FieldError(path, e.what());
  }
  return o;
}

Json SolveResultToJson(const SolveResult& r) {
  Json trace = Json::array();
  for (const TraceEntry& t : r.trace) {
    trace.push_back({{"start", t.start}, {"evaluations", t.evaluations}, {"objective", t.objective}});
  }
  return {{"pose", PoseToJson(r.pose)},
          {"objective", r.objective},
          {"init_objective", r.init_objective},
          {"evaluations", r.evaluations},
          {"best_start", r.best_start},
          {"converged", r.converged},
          {"trace", trace}};
}

Json SymmetryToJson(const SymmetrySpec& sym) {
  Json discrete = Json::array();
  for (const Pose& p : sym.discrete) discrete.push_back(PoseToJson(p));
  Json continuous = Json::array();
  for (const auto& a : sym.continuous) {
    continuous.push_back({{"axis", Vec3ToJson(a.direction)}, {"point", Vec3ToJson(a.point)}});
  }
  return {{"discrete", discrete}, {"continuous", continuous}};
}

SymmetrySpec SymmetryFromJson(const Json& j, const std::string& path) {
  SymmetrySpec sym;
  if (j.is_null()) return sym;
  if (!j.is_object()) FieldError(path, "expected an object");
  if (auto it = j.find("discrete"); it != j.end()) {
    if (!it->is_array()) FieldError(path + ".discrete", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = path + ".discrete[" + std::to_string(i) + "]";
      const Json& item = (*it)[i];
      if (item.is_array()) {
        const auto rot = NumberArray(item, 9, p);
        Pose s;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) s.rotation(r, c) = rot[3 * r + c];
        if (!s.IsValid(1e-6)) FieldError(p, "not a proper rotation matrix");
        sym.discrete.push_back(s);
      } else {
        sym.discrete.push_back(PoseFromJson(item, p));
      }
    }
  }
  if (auto it = j.find("continuous"); it != j.end()) {
    if (!it->is_array()) FieldError(path + ".continuous", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = path + ".continuous[" + std::to_string(i) + "]";
      SymmetrySpec::Axis axis;
      axis.direction = Vec3FromJson(Member((*it)[i], "axis", p), p + ".axis");
      if (!(axis.direction.norm() > 0.0)) FieldError(p + ".axis", "must be non-zero");
      axis.direction.normalize();
      axis.point = Optional((*it)[i], "point", p, Vec3(Vec3::Zero()), Vec3FromJson);
      sym.continuous.push_back(axis);
    }
  }
  return sym;
}

Json DiagnosticsToJson(const RenderDiagnostics& d) {
  return {{"mask_pixels", d.mask_pixels},
          {"invalid_exit", d.invalid_exit},
          {"total_internal_reflection", d.total_internal_reflection},
          {"bounce_limit", d.bounce_limit},
          {"leaked", d.leaked}};
}

Json MetricReportToJson(const MetricReport& report) {
  Json instances = Json::array();
  for (const InstanceMetrics& m : report.instances) {
    Json item = {{"id", m.id},
                 {"add", m.add},
                 {"add_s", m.add_s},
                 {"add_or_adds", m.add_or_adds},
                 {"symmetric", m.symmetric},
                 {"diameter", m.diameter},
                 {"mssd", m.mssd},
                 {"mspd", m.mspd},
                 {"vsd", m.vsd},
                 {"vsd_recall", m.vsd_recall},
                 {"mssd_recall", m.mssd_recall},
                 {"mspd_recall", m.mspd_recall}};
    item["mae"] = m.mae ? Json(*m.mae) : Json(nullptr);
    instances.push_back(item);
  }
  Json j = {{"instances", instances},
            {"aggregate",
             {{"add_recall_01d", report.add_recall_01d},
              {"ar", report.ar.ar},
              {"ar_vsd", report.ar.vsd},
              {"ar_mssd", report.ar.mssd},
              {"ar_mspd", report.ar.mspd}}},
            {"model_points", report.model_points}};
  j["aggregate"]["mae"] = report.mae ? Json(*report.mae) : Json(nullptr);
  return j;
}

Json InterLossToJson(const InterLoss& loss) {
  return {{"flow", loss.flow}, {"rho", loss.rho}, {"mask", loss.mask}, {"inter", loss.total()}};
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::string Fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void WriteMaps(const std::filesystem::path& dir, const RfaMaps& maps) {
  std::filesystem::create_directories(dir);
  const std::size_t n = maps.PixelCount();
  FloatMap flow{maps.width, maps.height, 3, std::vector<float>(3 * n, 0.0f)};
  FloatMap rho{maps.width, maps.height, 1, std::vector<float>(n)};
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    flow.data[3 * i] = static_cast<float>(maps.flow[2 * i]);
    flow.data[3 * i + 1] = static_cast<float>(maps.flow[2 * i + 1]);
    rho.data[i] = static_cast<float>(maps.rho[i]);
    mask[i] = maps.mask[i] >= 0.5 ? 255 : 0;
  }
  WritePfm(dir / "flow.pfm", flow);
  WritePfm(dir / "rho.pfm", rho);
  WritePng8(dir / "mask.png", maps.width, maps.height, 1, mask);
}

RfaMaps ReadMaps(const std::filesystem::path& flow_path, const std::filesystem::path& rho_path,
                 const std::filesystem::path& mask_path) {
  const FloatMap flow = ReadPfm(flow_path);
  const FloatMap rho = ReadPfm(rho_path);
  int w = 0, h = 0, c = 0;
  const auto mask = ReadPng8(mask_path, w, h, c);
  if (flow.width != w || flow.height != h || rho.width != w || rho.height != h) {
    Fail(ErrorCode::kParse, "matte maps have inconsistent sizes");
  }
  if (flow.channels != 3 && flow.channels != 1) Fail(ErrorCode::kParse, "flow.pfm: unexpected channel count");
  if (rho.channels != 1) Fail(ErrorCode::kParse, "rho.pfm: expected one channel");
  RfaMaps maps(w, h);
  for (std::size_t i = 0; i < maps.PixelCount(); ++i) {
    maps.mask[i] = mask[i * c] >= 128 ? 1.0 : 0.0;
    if (flow.channels == 3) {
      maps.flow[2 * i] = flow.data[3 * i];
      maps.flow[2 * i + 1] = flow.data[3 * i + 1];
    }
    maps.rho[i] = rho.data[i];
  }
  return maps;
}

RfaMaps ReadMaps(const std::filesystem::path& dir) {
  return ReadMaps(dir / "flow.pfm", dir / "rho.pfm", dir / "mask.png");
}

void WriteDepth(const std::filesystem::path& path, int width, int height,
                const std::vector<double>& depth) {
  FloatMap map{width, height, 1, std::vector<float>(depth.begin(), depth.end())};
  WritePfm(path, map);
}

std::vector<double> ReadDepth(const std::filesystem::path& path, int& width, int& height) {
  const FloatMap map = ReadPfm(path);
  if (map.channels != 1) Fail(ErrorCode::kParse, "depth.pfm: expected one channel");
  width = map.width;
  height = map.height;
  return {map.data.begin(), map.data.end()};
}

void WriteRegions(const std::filesystem::path& path, const RegionMap& regions) {
  if (regions.region_count() > 255) {
    Fail(ErrorCode::kInvalidArgument, "regions: 8-bit label PNG holds at most 255 regions");
  }
  std::vector<std::uint8_t> labels(regions.labels.begin(), regions.labels.end());
  WritePng8(path, regions.width, regions.height, 1, labels);
}

Json AnchorsToJson(const std::vector<Vec3>& anchors) {
  Json out = Json::array();
  for (const Vec3& a : anchors) out.push_back(Vec3ToJson(a));
  return out;
}

}  // namespace glasspose
