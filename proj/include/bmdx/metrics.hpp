// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bmdx/imaging.hpp"

namespace bmdx {

struct PairedRecord {
  std::string case_id;
  std::string pose;
  double predicted = 0.0;
  double ground_truth = 0.0;
};

/// Prediction / ground-truth pairs keyed by (case_id, pose). Values must be
/// finite and keys unique.
class PairedSeries {
 public:
  explicit PairedSeries(std::vector<PairedRecord> records);

  std::span<const PairedRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::vector<double> predicted() const;
  std::vector<double> ground_truth() const;

 private:
  std::vector<PairedRecord> records_;
};

/// Sample Pearson correlation. Throws UndefinedMetricError if either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct RegressionMetrics {
  double pcc = 0.0;
  double mae = 0.0;
  /// Residual standard error of the least-squares fit of ground truth on prediction (n - 2 dof).
  double see = 0.0;
};

RegressionMetrics regression_metrics(const PairedSeries& series);

/// ICC(2,1): two-way random effects, absolute agreement, single measurement,
/// with prediction and ground truth as the two raters.
double icc(const PairedSeries& series);

/// Root mean square over cases of the per-case coefficient of variation of
/// the predictions across poses (sample SD), in percent.
double rms_cv_percent(const PairedSeries& series);

double dice(const Mask2D& a, const Mask2D& b);

struct DecompositionMetrics {
  /// 10 log10(max(gt)^2 / MSE); +infinity when the images are identical.
  double psnr = 0.0;
  /// Dice averaged over the thresholds at which at least one image is non-empty.
  double mean_dice = 0.0;
  std::size_t thresholds_used = 0;
};

/// Both images are binarised with `>= threshold` at each threshold.
DecompositionMetrics decomposition_metrics(const Image2D& gt, const Image2D& pred,
                                           std::span<const double> dice_thresholds);

/// {10%, 25%, 50%, 75%} of the ground-truth maximum.
std::vector<double> default_dice_thresholds(const Image2D& gt);

struct BlandAltmanReport {
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double lower = 0.0;  // mean - 1.96 SD
  double upper = 0.0;  // mean + 1.96 SD
  std::vector<double> differences;  // predicted - ground truth, record order
  std::vector<bool> sample_outlier;
  /// Cases whose every pose lies beyond the same limit, in first-seen order.
  std::vector<std::string> case_outliers;
};

BlandAltmanReport bland_altman(const PairedSeries& series);

/// `metric,value` rows.
struct MetricRow {
  std::string metric;
  double value = 0.0;
};
void write_metrics_csv(std::span<const MetricRow> rows, const std::filesystem::path& path);
/// `case_id,pose,mean,difference,outlier,case_outlier` rows.
void write_bland_altman_csv(const PairedSeries& series, const BlandAltmanReport& report,
                            const std::filesystem::path& path);

}  // namespace bmdx
