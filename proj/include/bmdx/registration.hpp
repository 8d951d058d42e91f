// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>

#include "bmdx/cma_es.hpp"
#include "bmdx/imaging.hpp"
#include "bmdx/pose.hpp"
#include "bmdx/projection.hpp"

namespace bmdx {

struct ImageGradient {
  Image2D gx;
  Image2D gy;
};

/// Central differences in the interior, one-sided differences on the border,
/// in pixel units. Requires w, h >= 2.
ImageGradient gradient_image(const Image2D& image);

/// Zero-mean normalised cross-correlation. Throws UndefinedMetricError when
/// either input has zero variance.
double ncc(std::span<const double> a, std::span<const double> b);
double ncc(const Image2D& a, const Image2D& b);

/// NCC(d/dx a, d/dx b) + NCC(d/dy a, d/dy b), in [-2, 2].
double gc_similarity(const Image2D& a, const Image2D& b);

/// sigma0 = 2 (degrees for rotations, mm for translations), budget and tolerances sized for 2D-3D registration.
CmaConfig default_registration_config();

struct RegistrationResult {
  RigidTransform6 pose;
  double gc = 0.0;
  double gc_init = 0.0;
  std::size_t evaluations = 0;
  CmaStop stop = CmaStop::kMaxEvaluations;
};

/// Maximises gc_similarity(xray, DRR(pose)) over the six pose parameters with
/// CMA-ES, starting from `init`. Poses whose DRR has a constant gradient
/// channel score +infinity. Throws RegistrationError when the DRR at `init`
/// (or the X-ray) has no usable gradient.
RegistrationResult register_2d3d(const Image2D& xray, const Volume3D& volume, const Mask3D* mask,
                                 const ProjectionGeometry& geometry, const RigidTransform6& init,
                                 const CmaConfig& config);

}  // namespace bmdx
