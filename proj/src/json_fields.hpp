// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "glasspose/error.hpp"
#include "glasspose/serialization.hpp"

namespace glasspose::json_fields {

[[noreturn]] inline void FieldError(const std::string& path, const std::string& what) {
  Fail(ErrorCode::kInvalidArgument, path + ": " + what);
}

inline const Json& Member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) FieldError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) FieldError(path + "." + key, "missing");
  return *it;
}

inline double Number(const Json& j, const std::string& path) {
  if (!j.is_number()) FieldError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) FieldError(path, "must be finite");
  return v;
}

inline int Integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) FieldError(path, "expected an integer");
  return j.get<int>();
}

inline std::vector<double> NumberArray(const Json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) FieldError(path, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename T, typename Fn>
T Optional(const Json& j, const char* key, const std::string& path, T fallback, Fn read) {
  if (!j.is_object()) FieldError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return read(*it, path + "." + key);
}


inline std::string String(const Json& j, const std::string& path) {
  if (!j.is_string()) FieldError(path, "expected a string");
  return j.get<std::string>();
}

}  // namespace glasspose::json_fields
