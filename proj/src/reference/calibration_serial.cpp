// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/reference.hpp"

namespace bmdx::serial {

Volume3D apply_calibration(const Volume3D& hu_volume, const CalibrationLine& line) {
  if (hu_volume.unit() != VolumeUnit::kHounsfield) throw UnitMismatchError("expected a HOUNSFIELD volume");
  std::vector<double> out;
  out.reserve(hu_volume.values().size());
  for (double hu : hu_volume.values()) out.push_back(std::max(0.0, line(hu)));
  return Volume3D(hu_volume.grid(), VolumeUnit::kDensityMgCm3, std::move(out));
}

}  // namespace bmdx::serial
