// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-threaded reference versions of the OpenMP kernels. Tests assert the
// parallel kernels are bit-identical to these; bench/ times one against the other.

#include <span>

#include "bmdx/bmd.hpp"
#include "bmdx/calibration.hpp"
#include "bmdx/projection.hpp"

namespace bmdx::serial {

/// Marches every sample between the ray's reach limits, with no box clipping.
Image2D render_drr(const Volume3D& volume, const Mask3D* mask, const ProjectionGeometry& geometry,
                   const RigidTransform6& pose);

Volume3D apply_calibration(const Volume3D& hu_volume, const CalibrationLine& line);

ThresholdTuning tune_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd,
                               std::span<const double> grid);

}  // namespace bmdx::serial
