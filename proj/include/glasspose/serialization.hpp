// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "glasspose/geometry.hpp"
#include "glasspose/metrics.hpp"
#include "glasspose/pose_solver.hpp"
#include "glasspose/refract_render.hpp"
#include "glasspose/surface_regions.hpp"

namespace glasspose {

using Json = nlohmann::json;

// JSON <-> domain types. Readers take the field path of the value being read
// ("scene.pose") so errors name the offending field.

Json PoseToJson(const Pose& pose);
Pose PoseFromJson(const Json& j, const std::string& path = "pose");

Json IntrinsicsToJson(const CameraIntrinsics& intr);
CameraIntrinsics IntrinsicsFromJson(const Json& j, const std::string& path = "intrinsics");

Json RenderConfigToJson(const RenderConfig& cfg);
/// Missing fields keep the defaults of `base`. A null or missing
/// background_depth leaves NaN in the result.
RenderConfig RenderConfigFromJson(const Json& j, const std::string& path = "render",
                                  RenderConfig base = {});

Json SolverOptionsToJson(const SolverOptions& opts);
SolverOptions SolverOptionsFromJson(const Json& j, const std::string& path = "solver",
                                    SolverOptions base = {});

Json SolveResultToJson(const SolveResult& result);

Json SymmetryToJson(const SymmetrySpec& sym);
SymmetrySpec SymmetryFromJson(const Json& j, const std::string& path = "symmetry");

Json DiagnosticsToJson(const RenderDiagnostics& d);
Json MetricReportToJson(const MetricReport& report);
Json InterLossToJson(const InterLoss& loss);

Json Vec3ToJson(const Vec3& v);
Vec3 Vec3FromJson(const Json& j, const std::string& path);

Json ReadJsonFile(const std::filesystem::path& path);
/// Pretty-printed with two-space indent and a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& j);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string Fnv1aHex(const std::string& bytes);

// Matte directories: flow.pfm (3 channels, third zero), rho.pfm, mask.png.
void WriteMaps(const std::filesystem::path& dir, const RfaMaps& maps);
RfaMaps ReadMaps(const std::filesystem::path& dir);
RfaMaps ReadMaps(const std::filesystem::path& flow, const std::filesystem::path& rho,
                 const std::filesystem::path& mask);

void WriteDepth(const std::filesystem::path& path, int width, int height,
                const std::vector<double>& depth);
std::vector<double> ReadDepth(const std::filesystem::path& path, int& width, int& height);

/// 8-bit label PNG; requires K <= 255.
void WriteRegions(const std::filesystem::path& path, const RegionMap& regions);
Json AnchorsToJson(const std::vector<Vec3>& anchors);

}  // namespace glasspose
