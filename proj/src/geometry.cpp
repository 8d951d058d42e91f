// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "bmdx/error.hpp"
#include "bmdx/pose.hpp"
#include "bmdx/projection.hpp"

namespace bmdx {

// --- RigidTransform6 ------------------------------------------------------

double canonical_angle(double degrees) {
  double a = std::fmod(degrees, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

RigidTransform6 RigidTransform6::from_array(std::span<const double> p) {
  if (p.size() != 6) throw InvariantError("a rigid pose has exactly 6 parameters");
  return {p[0], p[1], p[2], p[3], p[4], p[5]};
}

RigidTransform6 RigidTransform6::canonical() const {
  for (double v : to_array()) {
    if (!std::isfinite(v)) throw InvariantError("pose parameters must be finite");
  }
  return {canonical_angle(rx), canonical_angle(ry), canonical_angle(rz), tx, ty, tz};
}

Mat3 RigidTransform6::rotation() const {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const Mat3 x = Eigen::AngleAxisd(rx * kDeg, Vec3::UnitX()).toRotationMatrix();
  const Mat3 y = Eigen::AngleAxisd(ry * kDeg, Vec3::UnitY()).toRotationMatrix();
  const Mat3 z = Eigen::AngleAxisd(rz * kDeg, Vec3::UnitZ()).toRotationMatrix();
  return z * y * x;
}

Vec3 RigidTransform6::apply(const Vec3& p, const Vec3& center) const {
  return rotation() * (p - center) + center + translation();
}

Vec3 RigidTransform6::apply_inverse(const Vec3& p, const Vec3& center) const {
  return rotation().transpose() * (p - center - translation()) + center;
}

RigidTransform6 add_offset(const RigidTransform6& base, const RigidTransform6& offset) {
  return RigidTransform6{base.rx + offset.rx, base.ry + offset.ry, base.rz + offset.rz,
                         base.tx + offset.tx, base.ty + offset.ty, base.tz + offset.tz}
      .canonical();
}

double mean_corner_tre(const Grid3& grid, const RigidTransform6& a, const RigidTransform6& b) {
  const Vec3 c = grid.centroid();
  double sum = 0.0;
  const auto corners = grid.corners();
  for (const auto& p : corners) sum += (a.apply(p, c) - b.apply(p, c)).norm();
  return sum / static_cast<double>(corners.size());
}

// --- ProjectionGeometry ---------------------------------------------------

void ProjectionGeometry::validate() const {
  constexpr double kTol = 1e-9;
  if (detector_dims.w == 0 || detector_dims.h == 0) throw InvariantError("detector dims must be >= 1");
  if (!(detector_spacing[0] > 0.0 && detector_spacing[1] > 0.0)) {
    throw InvariantError("detector spacing must be > 0");
  }
  if (!(step_mm > 0.0) || !std::isfinite(step_mm)) throw InvariantError("step_mm must be > 0");
  if (!detector_center.allFinite() || !basis_u.allFinite() || !basis_v.allFinite()) {
    throw InvariantError("detector placement must be finite");
  }
  if (std::abs(basis_u.norm() - 1.0) > kTol || std::abs(basis_v.norm() - 1.0) > kTol ||
      std::abs(basis_u.dot(basis_v)) > kTol) {
    throw InvariantError("detector basis must be orthonormal within 1e-9");
  }
  const Vec3 normal = basis_u.cross(basis_v);
  if (mode == ProjectionMode::kParallel) {
    if (!ray_dir.allFinite() || ray_dir.norm() == 0.0) throw InvariantError("ray_dir must be a non-zero vector");
    if (std::abs(normal.dot(ray_dir.normalized())) < kTol) {
      throw InvariantError("ray_dir is parallel to the detector plane");
    }
  } else {
    if (!source.allFinite()) throw InvariantError("source must be finite");
    if (std::abs(normal.dot(source - detector_center)) < kTol) {
      throw InvariantError("pinhole source lies on the detector plane");
    }
  }
}

Vec3 ProjectionGeometry::pixel_position(std::size_t x, std::size_t y) const {
  const double u = (static_cast<double>(x) - 0.5 * static_cast<double>(detector_dims.w - 1)) * detector_spacing[0];
  const double v = (static_cast<double>(y) - 0.5 * static_cast<double>(detector_dims.h - 1)) * detector_spacing[1];
  return detector_center + u * basis_u + v * basis_v;
}

namespace {

Vec3 vec3_of(const KeyValueText& kv, const std::string& key) {
  const auto v = kv.get_doubles(key, 3);
  return {v[0], v[1], v[2]};
}

std::string vec3_text(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

}  // namespace

ProjectionGeometry geometry_from_text(const KeyValueText& kv) {
  ProjectionGeometry g;
  const auto& mode = kv.get("mode");
  if (mode == "PARALLEL") {
    g.mode = ProjectionMode::kParallel;
  } else if (mode == "PINHOLE") {
    g.mode = ProjectionMode::kPinhole;
  } else {
    throw ParseError("mode", "expected PARALLEL or PINHOLE, got '" + mode + "'");
  }
  const auto dims = kv.get_ints("detector_dims", 2);
  if (dims[0] < 1 || dims[1] < 1) throw ParseError("detector_dims", "must be >= 1");
  g.detector_dims = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1])};
  const auto spacing = kv.get_doubles("detector_spacing", 2);
  g.detector_spacing = {spacing[0], spacing[1]};
  g.detector_center = vec3_of(kv, "detector_center");
  g.basis_u = vec3_of(kv, "basis_u");
  g.basis_v = vec3_of(kv, "basis_v");
  if (g.mode == ProjectionMode::kParallel) {
    g.ray_dir = vec3_of(kv, "ray_dir");
  } else {
    g.source = vec3_of(kv, "source");
  }
  g.step_mm = kv.get_double("step_mm");
  g.validate();
  return g;
}

ProjectionGeometry read_geometry(const std::filesystem::path& path) {
  return geometry_from_text(KeyValueText::load(path, '='));
}

std::string geometry_to_text(const ProjectionGeometry& g) {
  std::string out;
  out += std::string("mode = ") + (g.mode == ProjectionMode::kParallel ? "PARALLEL" : "PINHOLE") + "\n";
  out += "detector_dims = " + std::to_string(g.detector_dims.w) + " " + std::to_string(g.detector_dims.h) + "\n";
  out += "detector_spacing = " + format_double(g.detector_spacing[0]) + " " + format_double(g.detector_spacing[1]) +
         "\n";
  out += "detector_center = " + vec3_text(g.detector_center) + "\n";
  out += "basis_u = " + vec3_text(g.basis_u) + "\n";
  out += "basis_v = " + vec3_text(g.basis_v) + "\n";
  if (g.mode == ProjectionMode::kParallel) {
    out += "ray_dir = " + vec3_text(g.ray_dir) + "\n";
  } else {
    out += "source = " + vec3_text(g.source) + "\n";
  }
  out += "step_mm = " + format_double(g.step_mm) + "\n";
  return out;
}

}  // namespace bmdx
