// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include "../ray_march.hpp"
#include "bmdx/reference.hpp"

namespace bmdx::serial {

Image2D render_drr(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
                   const RigidTransform6& pose) {
  const detail::RayMarcher marcher(volume, mask, geometry, pose);
  const std::size_t w = geometry.detector_dims.w;
  const std::size_t h = geometry.detector_dims.h;
  std::vector<double> pixels(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      pixels[y * w + x] = marcher.integrate(marcher.ray(x, y)) * marcher.pixel_scale();
    }
  }
  return Image2D(geometry.detector_dims, geometry.detector_spacing, marcher.output_unit(), std::move(pixels));
}

}  // namespace bmdx::serial
