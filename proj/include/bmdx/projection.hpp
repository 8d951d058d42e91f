// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>

#include "bmdx/imaging.hpp"
#include "bmdx/pose.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx {

enum class ProjectionMode { kParallel, kPinhole };

/// Detector plus ray model. Pixel (x, y) sits at
///   detector_center + (x - (w-1)/2) * du * basis_u + (y - (h-1)/2) * dv * basis_v.
/// PARALLEL rays run along ray_dir through every pixel; PINHOLE rays run from
/// `source` to the pixel. Samples are taken at t = (k + 1/2) * step_mm along the
/// ray (t measured from the pixel for PARALLEL, from the source for PINHOLE).
struct ProjectionGeometry {
  ProjectionMode mode = ProjectionMode::kParallel;
  Dims2 detector_dims{1, 1};
  Vec2 detector_spacing = Vec2::Ones();
  Vec3 detector_center = Vec3::Zero();
  Vec3 basis_u = Vec3::UnitX();
  Vec3 basis_v = Vec3::UnitZ();
  Vec3 ray_dir = Vec3::UnitY();
  Vec3 source = Vec3(0.0, -1000.0, 0.0);
  double step_mm = 1.0;

  /// Throws InvariantError: basis not orthonormal (1e-9), step <= 0, ray parallel
  /// to the detector, or pinhole source on the detector plane.
  void validate() const;
  Vec3 pixel_position(std::size_t x, std::size_t y) const;
};

ProjectionGeometry geometry_from_text(const KeyValueText& kv);
ProjectionGeometry read_geometry(const std::filesystem::path& path);
std::string geometry_to_text(const ProjectionGeometry& geometry);

/// Trilinear interpolation at a world point. Points outside the lattice box
/// return 0; inside the box but beyond the outermost voxel centres the edge
/// value is held.
double sample_trilinear(const Volume3D& volume, const Vec3& point_mm);

/// Masked line-integral DRR. Each pixel sums rho * m along its ray with step
/// step_mm; m is the trilinearly sampled mask thresholded at 0.5. The pose
/// moves the volume (see RigidTransform6). For a DENSITY_MG_CM3 volume the
/// result is AREAL_G_CM2 (mg/cm^3 * mm * 1e-4); any other unit yields a
/// DIMENSIONLESS image holding the raw sum * step_mm.
/// Pixels are distributed over OpenMP threads; each pixel is accumulated in a
/// fixed order, so the image is bit-identical for any thread count.
Image2D render_drr(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
                   const RigidTransform6& pose);

inline Image2D render_drr(const Volume3D& volume, const ProjectionGeometry& geometry, const RigidTransform6& pose) {
  return render_drr(volume, nullptr, geometry, pose);
}

}  // namespace bmdx
