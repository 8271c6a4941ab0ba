// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "glasspose/image.hpp"
#include "glasspose/refract_render.hpp"

namespace glasspose {

/// Bilinear lookup of `bg` at (x + dx, y + dy), clamped to the border.
/// Writes `bg.channels` values into `out`.
void SampleBackground(const Image& bg, double x, double y, double dx, double dy, double* out);

/// Per-pixel matte compositing
///   C = (1 - mask) * B + mask * rho * B(p + flow)
/// Pixels with mask == 0 copy the background unchanged.
Image Composite(const RfaMaps& rfa, const Image& bg);

}  // namespace glasspose
