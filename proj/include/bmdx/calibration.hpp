// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bmdx/imaging.hpp"

namespace bmdx {

/// density [mg/cm^3] = slope * HU + intercept, fitted on phantom rods.
struct CalibrationLine {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rmse = 0.0;
  std::size_t n_samples = 0;

  double operator()(double hu) const { return slope * hu + intercept; }
};

/// Ordinary least squares. Throws RankDeficiencyError when every HU value is identical.
CalibrationLine fit_calibration(std::span<const double> hu_means, std::span<const double> densities);

/// Per-voxel affine HU -> mg/cm^3 map; negative densities are clamped to zero.
/// Voxels are split across OpenMP threads; the output does not depend on the split.
Volume3D apply_calibration(const Volume3D& hu_volume, const CalibrationLine& line);

struct RodMeasurement {
  std::string rod_id;
  double hu_mean = 0.0;
  double density_mg_cm3 = 0.0;
};

/// Rod table CSV: `rod_id,hu_mean,density_mg_cm3`.
std::vector<RodMeasurement> read_rod_table(const std::filesystem::path& path);
void write_rod_table(std::span<const RodMeasurement> rods, const std::filesystem::path& path);
CalibrationLine fit_calibration(std::span<const RodMeasurement> rods);

/// Text record: slope, intercept, residual_rmse, n_samples.
void write_calibration_line(const CalibrationLine& line, const std::filesystem::path& path);
CalibrationLine read_calibration_line(const std::filesystem::path& path);

}  // namespace bmdx
