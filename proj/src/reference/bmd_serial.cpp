// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "../bmd_internal.hpp"
#include "bmdx/reference.hpp"

namespace bmdx::serial {

ThresholdTuning tune_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd,
                               std::span<const double> grid) {
  detail::check_tuning_inputs(drrs, gt_bmd, grid);
  std::vector<ThresholdPoint> curve;
  curve.reserve(grid.size());
  for (double t : grid) curve.push_back(detail::evaluate_threshold(drrs, gt_bmd, t));
  return detail::select_best(std::move(curve));
}

}  // namespace bmdx::serial
