// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pieces of threshold tuning shared with the serial reference.

#include "bmdx/bmd.hpp"

namespace bmdx::detail {

void check_tuning_inputs(std::span<const Image2D> drrs, std::span<const double> gt_bmd, std::span<const double> grid);
ThresholdPoint evaluate_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd, double t);
ThresholdTuning select_best(std::vector<ThresholdPoint> curve);

}  // namespace bmdx::detail
