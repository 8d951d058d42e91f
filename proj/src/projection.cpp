// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/projection.hpp"

#include <limits>
#include <vector>

#include "bmdx/error.hpp"
#include "ray_march.hpp"

namespace bmdx {

namespace detail {

namespace {

// mg/cm^3 * mm -> g/cm^2
constexpr double kArealScale = 1e-4;

}  // namespace

RayMarcher::RayMarcher(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
                       const RigidTransform6& pose)
    : sampler_(volume, mask),
      geometry_(geometry),
      step_(geometry.step_mm) {
  geometry.validate();
  if (mask != nullptr && !mask->grid().same_lattice(volume.grid())) {
    throw InvariantError("mask lattice does not match the volume lattice");
  }
  const auto pose_c = pose.canonical();
  const auto& grid = volume.grid();
  box_min_ = grid.box_min();
  box_max_ = grid.box_max();
  origin_ = grid.origin();
  inv_spacing_ = grid.spacing().cwiseInverse();
  center_ = grid.centroid();
  rot_t_ = pose_c.rotation().transpose();
  translation_ = pose_c.translation();
  if (volume.unit() == VolumeUnit::kDensityMgCm3) {
    pixel_scale_ = step_ * kArealScale;
    output_unit_ = ImageUnit::kArealGCm2;
  } else {
    pixel_scale_ = step_;
    output_unit_ = ImageUnit::kDimensionless;
  }
}

IndexRay RayMarcher::ray(std::size_t x, std::size_t y) const {
  const Vec3 pixel = geometry_.pixel_position(x, y);
  Vec3 start;
  Vec3 dir;
  IndexRay r;
  if (geometry_.mode == ProjectionMode::kParallel) {
    start = pixel;
    dir = geometry_.ray_dir.normalized();
  } else {
    start = geometry_.source;
    const Vec3 span = pixel - geometry_.source;
    dir = span / span.norm();
    r.k_first = 0;
    r.k_last = static_cast<long long>(std::floor(span.norm() / step_ - 0.5));
  }
  // World -> volume frame: undo the pose.
  r.origin = rot_t_ * (start - center_ - translation_) + center_;
  r.dir = rot_t_ * dir;
  r.q0 = (r.origin - origin_).cwiseProduct(inv_spacing_);
  r.dq = r.dir.cwiseProduct(inv_spacing_);
  if (geometry_.mode == ProjectionMode::kParallel) {
    const double reach = (r.origin - center_).norm() + 0.5 * (box_max_ - box_min_).norm() + step_;
    r.k_first = static_cast<long long>(std::floor(-reach / step_)) - 1;
    r.k_last = static_cast<long long>(std::ceil(reach / step_)) + 1;
  }
  return r;
}

IndexRay RayMarcher::clip(IndexRay r) const {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (r.dir[a] == 0.0) {
      if (r.origin[a] < box_min_[a] || r.origin[a] > box_max_[a]) {
        r.k_last = r.k_first - 1;
        return r;
      }
      continue;
    }
    double t0 = (box_min_[a] - r.origin[a]) / r.dir[a];
    double t1 = (box_max_[a] - r.origin[a]) / r.dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
  }
  if (t_min > t_max) {
    r.k_last = r.k_first - 1;
    return r;
  }
  const auto k_lo = static_cast<long long>(std::ceil(t_min / step_ - 0.5)) - 1;
  const auto k_hi = static_cast<long long>(std::floor(t_max / step_ - 0.5)) + 1;
  r.k_first = std::max(r.k_first, k_lo);
  r.k_last = std::min(r.k_last, k_hi);
  return r;
}

}  // namespace detail

double sample_trilinear(const Volume3D& volume, const Vec3& point_mm) {
  const detail::LatticeSampler sampler(volume, nullptr);
  const auto& grid = volume.grid();
  const Vec3 q = (point_mm - grid.origin()).cwiseQuotient(grid.spacing());
  if (!sampler.inside(q.x(), q.y(), q.z())) return 0.0;
  return sampler.density(q.x(), q.y(), q.z());
}

Image2D render_drr(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
                   const RigidTransform6& pose) {
  const detail::RayMarcher marcher(volume, mask, geometry, pose);
  const std::size_t w = geometry.detector_dims.w;
  const std::size_t h = geometry.detector_dims.h;
  std::vector<double> pixels(w * h);
  const auto rows = static_cast<std::ptrdiff_t>(h);
  const double scale = marcher.pixel_scale();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto ray = marcher.clip(marcher.ray(x, static_cast<std::size_t>(y)));
      pixels[static_cast<std::size_t>(y) * w + x] = marcher.integrate(ray) * scale;
    }
  }
  return Image2D(geometry.detector_dims, geometry.detector_spacing, marcher.output_unit(), std::move(pixels));
}

}  // namespace bmdx
