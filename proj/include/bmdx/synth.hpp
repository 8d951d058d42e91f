// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmdx/calibration.hpp"
#include "bmdx/imaging.hpp"
#include "bmdx/pose.hpp"
#include "bmdx/projection.hpp"

namespace bmdx {

struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 radii = Vec3::Ones();
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Solid cylinder between two end-cap centres.
struct Cylinder {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::UnitZ();
  double radius = 1.0;
};

/// Infinite rod parallel to z through (x, y).
struct Rod {
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;
  double density = 0.0;
};

/// "Proximal femur" analog: head sphere + neck and shaft cylinders. The
/// trabecular core is the union of the same primitives shrunk by
/// shell_thickness; the rest of the bone is cortical shell.
struct FemurShape {
  Sphere head{Vec3(-12.0, 0.0, 22.0), 16.0};
  Cylinder neck{Vec3(-12.0, 0.0, 22.0), Vec3(10.0, 0.0, 4.0), 9.0};
  Cylinder shaft{Vec3(10.0, 0.0, 10.0), Vec3(14.0, 0.0, -48.0), 11.0};
  double shell_thickness = 3.0;
};

struct PhantomSpec {
  Dims3 dims{64, 64, 64};
  double spacing_mm = 2.0;
  Ellipsoid body{Vec3::Zero(), Vec3(50.0, 40.0, 60.0)};
  double soft_density = 0.0;
  FemurShape femur;
  double shell_density = 800.0;
  double core_density = 300.0;
  /// PF region = bone inside this box, snapped outward to whole voxels.
  Vec3 pf_box_min = Vec3(-34.0, -26.0, -4.0);
  Vec3 pf_box_max = Vec3(22.0, 26.0, 42.0);
  std::vector<Rod> rods{{-36.0, -52.0, 5.0, 0.0}, {-12.0, -52.0, 5.0, 100.0}, {12.0, -52.0, 5.0, 200.0},
                        {36.0, -52.0, 5.0, 400.0}};
  /// density = ref_slope * HU + ref_intercept
  double ref_slope = 0.8;
  double ref_intercept = 0.0;
  double noise_sigma_hu = 0.0;
  std::size_t supersample = 8;
  std::uint64_t seed = 1;

  /// Volume centred on the origin.
  Grid3 grid() const;
  /// Throws InvariantError for shapes leaving the volume, negative densities,
  /// overlapping rods, or rods touching the body.
  void validate() const;
};

struct NamedPose {
  std::string name;
  RigidTransform6 pose;
};

struct SyntheticCase {
  std::string case_id;
  PhantomSpec spec;
  Volume3D hu;
  Volume3D density;
  Mask3D bone_mask;
  /// Voxels containing any PF bone, grown by one voxel so that the trilinear
  /// footprint of every partial-volume voxel is inside the mask.
  Mask3D pf_mask;
  std::vector<NamedPose> poses;
  /// PF bone mass / PF bone volume of the continuous phantom, mg/cm^3.
  double true_vbmd = 0.0;
  /// Fraction of each voxel's volume that is PF bone.
  std::vector<double> pf_fraction;
  std::vector<RodMeasurement> rods;
};

/// Voxelises the phantom with spec.supersample^3 sub-samples per voxel on
/// voxels whose centre and corners disagree; HU = (density - intercept) / slope + N(0, sigma).
SyntheticCase generate_phantom(const PhantomSpec& spec);

/// Closed-form PF-bone mass and volume of a phantom whose PF box contains the
/// whole bone and whose femur is the head sphere alone (neck/shaft of zero radius).
double sphere_only_vbmd(const PhantomSpec& spec);

/// Line integral of the PF bone density along each detector ray, in g/cm^2,
/// computed from exact ray-shape intersections.
Image2D analytic_areal_map(const PhantomSpec& spec, const ProjectionGeometry& geometry, const RigidTransform6& pose);

/// Mean HU of voxels lying entirely inside each rod.
std::vector<RodMeasurement> measure_rods(const Volume3D& hu, const PhantomSpec& spec);

struct CohortSpec {
  std::size_t n_cases = 10;
  PhantomSpec base;
  double core_min = 100.0;
  double core_max = 300.0;
  double shell_ratio = 2.5;
  /// Relative jitter of femur radii, and absolute jitter (mm) of its position.
  double size_jitter = 0.02;
  double shift_jitter_mm = 1.0;
  std::vector<NamedPose> pose_set = default_pose_set();
  /// Per-case jitter added to each pose offset.
  double pose_jitter_deg = 1.0;
  double pose_jitter_mm = 1.0;
  std::uint64_t seed = 1;

  static std::vector<NamedPose> default_pose_set();
  /// Throws RangeError for an empty or inverted density range, or pose offsets beyond +-10 deg / +-15 mm.
  void validate() const;
};

inline constexpr double kMaxPoseAngleDeg = 10.0;
inline constexpr double kMaxPoseShiftMm = 15.0;

/// Per-case phantom parameters of a cohort, without voxelising.
std::vector<PhantomSpec> cohort_specs(const CohortSpec& cohort);
std::vector<std::vector<NamedPose>> cohort_poses(const CohortSpec& cohort);

std::vector<SyntheticCase> generate_cohort(const CohortSpec& cohort);

std::string case_name(std::size_t index);

}  // namespace bmdx
