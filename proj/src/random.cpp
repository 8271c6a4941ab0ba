// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/random.hpp"

#include <cmath>

namespace glasspose {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(SplitMix64(seed ^ SplitMix64(stream + 0x632be59bd9b4e019ull))) {}

CounterRng CounterRng::Split(std::uint64_t child) const {
  CounterRng out(key_, child);
  return out;
}

std::uint64_t CounterRng::NextU64() {
  return SplitMix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
}

double CounterRng::Uniform() { return double(NextU64() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::UniformIndex(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the distribution exact.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = NextU64();
  } while (r >= limit);
  return r % n;
}

double CounterRng::Normal() {
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Mat3 UniformRotation(CounterRng& rng) {
  // Shoemake's subgroup algorithm.
  const double u1 = rng.Uniform();
  const double u2 = rng.Uniform();
  const double u3 = rng.Uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2.0 * M_PI * u3), a * std::sin(2.0 * M_PI * u2),
                             a * std::cos(2.0 * M_PI * u2), b * std::sin(2.0 * M_PI * u3));
  return q.normalized().toRotationMatrix();
}

Vec3 UniformUnitVector(CounterRng& rng) {
  const double z = rng.Uniform(-1.0, 1.0);
  const double phi = rng.Uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace glasspose
