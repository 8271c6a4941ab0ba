// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/parallel.hpp"

#include <cstdlib>
#include <string>

namespace glasspose {

int DefaultThreads() {
  if (const char* env = std::getenv("GLASSPOSE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace glasspose
