// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "glasspose/geometry.hpp"

namespace glasspose {

/// Counter-based generator: the n-th draw of a stream is a pure function of
/// (seed, stream path, n). Split() derives independent child streams, so work
/// can be distributed over threads without perturbing any draw.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  CounterRng Split(std::uint64_t child) const;

  std::uint64_t NextU64();
  /// Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t UniformIndex(std::uint64_t n);
  /// Standard normal (Box-Muller, one value per two draws).
  double Normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t SplitMix64(std::uint64_t x);

/// Haar-uniform rotation from a uniformly sampled unit quaternion.
Mat3 UniformRotation(CounterRng& rng);

/// Uniform direction on the unit sphere.
Vec3 UniformUnitVector(CounterRng& rng);

}  // namespace glasspose
