// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bmdx/imaging.hpp"

namespace bmdx {

/// DXA-type targets are areal (g/cm^2), QCT-type targets volumetric (mg/cm^3).
/// The two are always fitted independently.
enum class BmdTarget { kDXA, kQCT };

std::string_view to_string(BmdTarget target);
BmdTarget parse_bmd_target(std::string_view text);

/// Maps the threshold-masked mean DRR intensity to BMD.
struct BmdCalibration {
  double threshold = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  BmdTarget target = BmdTarget::kQCT;
  double pcc_at_fit = 0.0;
};

struct MeanIntensity {
  double mean = 0.0;
  std::size_t pixel_count = 0;
};

/// Mean over pixels >= threshold. Throws EmptyRegionError when none qualify.
MeanIntensity drr_mean_intensity(const Image2D& drr, double threshold);

struct ThresholdPoint {
  double threshold = 0.0;
  double pcc = 0.0;
  /// False when some case had no pixel >= threshold or the correlation was undefined.
  bool valid = false;
};

struct ThresholdTuning {
  double best_threshold = 0.0;
  double best_pcc = 0.0;
  std::vector<ThresholdPoint> curve;
};

/// Evaluates PCC(mean intensity at t, ground truth) for every t in `grid` and
/// returns the maximiser; ties go to the smallest threshold. Grid points are
/// evaluated in parallel.
ThresholdTuning tune_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd,
                               std::span<const double> grid);

/// `count` evenly spaced thresholds from 0 to the 99th percentile (linear
/// interpolation between order statistics) of all pooled pixel intensities.
std::vector<double> default_threshold_grid(std::span<const Image2D> drrs, std::size_t count = 64);

/// Least-squares gt = slope * mean + intercept.
BmdCalibration fit_bmd_line(std::span<const double> means, std::span<const double> gt_bmd, double threshold,
                            BmdTarget target);

double predict_bmd(const Image2D& drr, const BmdCalibration& calibration);

/// Text record with keys target, threshold, slope, intercept, pcc_at_fit.
void write_bmd_calibration(const BmdCalibration& calibration, const std::filesystem::path& path);
BmdCalibration read_bmd_calibration(const std::filesystem::path& path);

/// Row of the BMD table CSV `case_id,pose,mean_intensity,pred_bmd,gt_bmd`.
struct BmdTableRow {
  std::string case_id;
  std::string pose;
  double mean_intensity = 0.0;
  double pred_bmd = 0.0;
  double gt_bmd = 0.0;
};

void write_bmd_table(std::span<const BmdTableRow> rows, const std::filesystem::path& path);
std::vector<BmdTableRow> read_bmd_table(const std::filesystem::path& path);

}  // namespace bmdx
