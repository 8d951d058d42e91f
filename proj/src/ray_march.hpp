// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ray setup and per-ray accumulation shared by the parallel renderer and the
// serial reference renderer. Both must produce bit-identical pixels, so the
// per-sample arithmetic lives only here.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "bmdx/projection.hpp"

namespace bmdx::detail {

/// A ray in continuous voxel-index space: q(t) = q0 + t * dq, sampled at
/// t = (k + 1/2) * step for k in [k_first, k_last].
struct IndexRay {
  Vec3 q0;
  Vec3 dq;
  // Same ray in the volume's world frame, used for box clipping.
  Vec3 origin;
  Vec3 dir;
  long long k_first = 0;
  long long k_last = -1;
};

/// Trilinear lookups on a lattice in continuous index coordinates. The
/// lattice box is [-1/2, n - 1/2] per axis; outside it nothing is sampled.
class LatticeSampler {
 public:
  LatticeSampler(const Volume3D& volume, const Mask3D* mask)
      : density_(volume.values().data()),
        mask_(mask != nullptr ? mask->values().data() : nullptr),
        nx_(volume.dims().nx),
        ny_(volume.dims().ny),
        nz_(volume.dims().nz),
        mx_(static_cast<double>(nx_ - 1)),
        my_(static_cast<double>(ny_ - 1)),
        mz_(static_cast<double>(nz_ - 1)),
        hx_(static_cast<double>(nx_) - 0.5),
        hy_(static_cast<double>(ny_) - 0.5),
        hz_(static_cast<double>(nz_) - 0.5) {}

  bool inside(double qx, double qy, double qz) const noexcept {
    return qx >= -0.5 && qy >= -0.5 && qz >= -0.5 && qx <= hx_ && qy <= hy_ && qz <= hz_;
  }
  bool has_mask() const noexcept { return mask_ != nullptr; }
  double density(double qx, double qy, double qz) const noexcept { return interpolate(density_, qx, qy, qz); }
  double mask(double qx, double qy, double qz) const noexcept { return interpolate(mask_, qx, qy, qz); }

 private:
  template <typename T>
  double interpolate(const T* data, double qx, double qy, double qz) const noexcept {
    const double cx = std::clamp(qx, 0.0, mx_);
    const double cy = std::clamp(qy, 0.0, my_);
    const double cz = std::clamp(qz, 0.0, mz_);
    const auto i0 = static_cast<std::size_t>(cx);
    const auto j0 = static_cast<std::size_t>(cy);
    const auto k0 = static_cast<std::size_t>(cz);
    const std::size_t i1 = std::min(i0 + 1, nx_ - 1);
    const std::size_t j1 = std::min(j0 + 1, ny_ - 1);
    const std::size_t k1 = std::min(k0 + 1, nz_ - 1);
    const double fx = cx - static_cast<double>(i0);
    const double fy = cy - static_cast<double>(j0);
    const double fz = cz - static_cast<double>(k0);
    const auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
      return static_cast<double>(data[i + nx_ * (j + ny_ * k)]);
    };
    const auto lerp = [](double a, double b, double f) { return a + f * (b - a); };
    const double c00 = lerp(at(i0, j0, k0), at(i1, j0, k0), fx);
    const double c10 = lerp(at(i0, j1, k0), at(i1, j1, k0), fx);
    const double c01 = lerp(at(i0, j0, k1), at(i1, j0, k1), fx);
    const double c11 = lerp(at(i0, j1, k1), at(i1, j1, k1), fx);
    return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
  }

  const double* density_;
  const std::uint8_t* mask_;
  std::size_t nx_, ny_, nz_;
  double mx_, my_, mz_;  // n - 1
  double hx_, hy_, hz_;  // n - 1/2
};

class RayMarcher {
 public:
  RayMarcher(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
             const RigidTransform6& pose);

  /// Every sample the ray could take, without box clipping.
  IndexRay ray(std::size_t x, std::size_t y) const;
  /// Restrict k to the samples that can land in the lattice box (with one
  /// sample of slack on either side; out-of-box samples contribute nothing).
  IndexRay clip(IndexRay ray) const;

  double integrate(const IndexRay& ray) const {
    double sum = 0.0;
    for (long long k = ray.k_first; k <= ray.k_last; ++k) {
      const double t = (static_cast<double>(k) + 0.5) * step_;
      const double qx = ray.q0.x() + t * ray.dq.x();
      const double qy = ray.q0.y() + t * ray.dq.y();
      const double qz = ray.q0.z() + t * ray.dq.z();
      if (!sampler_.inside(qx, qy, qz)) continue;
      if (sampler_.has_mask() && sampler_.mask(qx, qy, qz) < 0.5) continue;
      sum += sampler_.density(qx, qy, qz);
    }
    return sum;
  }

  /// Factor turning a raw sample sum into the output pixel value.
  double pixel_scale() const noexcept { return pixel_scale_; }
  ImageUnit output_unit() const noexcept { return output_unit_; }

 private:
  LatticeSampler sampler_;
  Vec3 box_min_, box_max_;
  Vec3 origin_, inv_spacing_;
  Vec3 center_;
  Mat3 rot_t_;
  Vec3 translation_;
  const ProjectionGeometry& geometry_;
  double step_;
  double pixel_scale_;
  ImageUnit output_unit_;
};

}  // namespace bmdx::detail
