// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "glasspose/compositing.hpp"
#include "glasspose/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace glasspose;

namespace {

Image RandomImage(CounterRng& rng, int w, int h, int c) {
  Image img(w, h, c);
  for (double& v : img.data) v = rng.Uniform();
  return img;
}

}  // namespace

TEST_CASE("background sampling") {
  Image grad(2, 1, 1);
  grad.data = {0.0, 1.0};
  double out[3];
  SampleBackground(grad, 0, 0, 0.5, 0, out);
  CHECK(out[0] == 0.5);
  SampleBackground(grad, 1, 0, 0, 0, out);
  CHECK(out[0] == 1.0);
  const Image flat(5, 4, 3, 0.3);
  SampleBackground(flat, 2, 2, 10.0, -12.0, out);
  for (double v : out) CHECK(v == 0.3);

  CounterRng rng(41);
  const Image img = RandomImage(rng, 13, 9, 3);
  for (int i = 0; i < 500; ++i) {
    const double x = rng.Uniform(-3, 16), y = rng.Uniform(-3, 12);
    SampleBackground(img, 0, 0, x, y, out);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(out[c] - oracles::Bilinear(img, x, y, c)) < 1e-12);
  }
}

TEST_CASE("empty matte composite is the background bit for bit") {
  CounterRng rng(42);
  const Image bg = RandomImage(rng, 20, 15, 3);
  RfaMaps empty(20, 15);
  for (double& f : empty.flow) f = rng.Uniform(-3, 3);
  CHECK(Composite(empty, bg) == bg);
}

TEST_CASE("compositing equation on known pixels") {
  const Image bg(4, 4, 1, 0.8);
  RfaMaps m(4, 4);
  m.mask[5] = 1.0;
  m.rho[5] = 0.5;
  m.mask[6] = 1.0;
  m.rho[6] = 1.0;
  const Image out = Composite(m, bg);
  CHECK(out.data[5] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(out.data[6] == 0.8);
  CHECK(out.data[0] == 0.8);
}

TEST_CASE("composite is linear in rho and matches a per-pixel oracle") {
  CounterRng rng(43);
  const Image bg = RandomImage(rng, 24, 18, 3);
  RfaMaps m = testing::RandomMaps(rng, 24, 18, 0.6);
  for (double& v : m.mask) v = v > 0 ? rng.Uniform(0.2, 1.0) : 0.0;
  std::array<Image, 3> outs;
  const std::array<double, 3> levels{0.0, 0.5, 1.0};
  for (int k = 0; k < 3; ++k) {
    for (double& r : m.rho) r = levels[k];
    outs[k] = Composite(m, bg);
  }
  for (int y = 0; y < 18; ++y) {
    for (int x = 0; x < 24; ++x) {
      const std::size_t i = m.Index(x, y);
      for (int c = 0; c < 3; ++c) {
        const double b = bg.at(x, y, c);
        const double s = oracles::Bilinear(bg, x + m.flow[2 * i], y + m.flow[2 * i + 1], c);
        for (int k = 0; k < 3; ++k) {
          const double want = (1 - m.mask[i]) * b + m.mask[i] * levels[k] * s;
          CHECK(std::abs(outs[k].at(x, y, c) - want) < 1e-12);
        }
        CHECK(std::abs(outs[1].at(x, y, c) - 0.5 * (outs[0].at(x, y, c) + outs[2].at(x, y, c))) < 1e-6);
      }
    }
  }
}

TEST_CASE("backgrounds only matter inside the reachable region") {
  CounterRng rng(44);
  const Image a = RandomImage(rng, 16, 16, 1);
  Image b = a;
  RfaMaps m(16, 16);
  m.mask[m.Index(3, 3)] = 1.0;
  m.rho[m.Index(3, 3)] = 0.9;
  m.flow[2 * m.Index(3, 3)] = 4.0;
  // Change background pixels far from the mask and from (7, 3).
  for (int y = 10; y < 16; ++y) {
    for (int x = 10; x < 16; ++x) b.at(x, y, 0) = 1.0 - b.at(x, y, 0);
  }
  const Image ca = Composite(m, a), cb = Composite(m, b);
  CHECK(ca.at(3, 3, 0) == cb.at(3, 3, 0));
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      if (x >= 10 && y >= 10) continue;
      CHECK(ca.at(x, y, 0) == cb.at(x, y, 0));
    }
  }
}

TEST_CASE("resolution mismatch is an error") {
  CHECK_THROWS_AS(Composite(RfaMaps(4, 4), Image(5, 4, 3)), Error);
}
