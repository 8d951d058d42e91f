// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <span>

#include "bmdx/imaging.hpp"

namespace bmdx {

using Mat3 = Eigen::Matrix3d;

/// Six-parameter rigid pose acting on a volume. Rotations are in degrees,
/// applied as R = Rz * Ry * Rx (extrinsic X, then Y, then Z) about the volume
/// centroid; translations are in millimetres. A volume point p maps to
/// R (p - c) + c + t in world space.
struct RigidTransform6 {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;

  static RigidTransform6 from_array(std::span<const double> p);
  std::array<double, 6> to_array() const { return {rx, ry, rz, tx, ty, tz}; }

  /// Angles wrapped into (-180, 180]; throws InvariantError on non-finite fields.
  RigidTransform6 canonical() const;

  Mat3 rotation() const;
  Vec3 translation() const { return {tx, ty, tz}; }

  Vec3 apply(const Vec3& p, const Vec3& center) const;
  Vec3 apply_inverse(const Vec3& p, const Vec3& center) const;

  friend bool operator==(const RigidTransform6&, const RigidTransform6&) = default;
};

/// Wraps degrees into (-180, 180].
double canonical_angle(double degrees);

/// Parameter-wise sum, canonicalised. Used to place a nominal pose offset on top of a base pose.
RigidTransform6 add_offset(const RigidTransform6& base, const RigidTransform6& offset);

/// Mean distance between the eight lattice-box corners mapped by `a` and by `b`.
double mean_corner_tre(const Grid3& grid, const RigidTransform6& a, const RigidTransform6& b);

}  // namespace bmdx
