// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/bmd.hpp"

#include <algorithm>
#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/metrics.hpp"
#include "bmdx/text_format.hpp"
#include "bmd_internal.hpp"

namespace bmdx {

std::string_view to_string(BmdTarget target) { return target == BmdTarget::kDXA ? "DXA" : "QCT"; }

BmdTarget parse_bmd_target(std::string_view text) {
  if (text == "DXA") return BmdTarget::kDXA;
  if (text == "QCT") return BmdTarget::kQCT;
  throw ParseError("target", "expected DXA or QCT, got '" + std::string(text) + "'");
}

MeanIntensity drr_mean_intensity(const Image2D& drr, double threshold) {
  if (!(threshold >= 0.0)) throw RangeError("threshold must be >= 0");
  MeanIntensity out;
  double sum = 0.0;
  for (double v : drr.values()) {
    if (v >= threshold) {
      sum += v;
      ++out.pixel_count;
    }
  }
  if (out.pixel_count == 0) throw EmptyRegionError("no DRR pixel reaches the threshold");
  out.mean = sum / static_cast<double>(out.pixel_count);
  return out;
}

namespace detail {

void check_tuning_inputs(std::span<const Image2D> drrs, std::span<const double> gt_bmd, std::span<const double> grid) {
  if (drrs.size() != gt_bmd.size()) throw DegenerateInputError("one ground-truth value per DRR is required");
  if (drrs.size() < 3) throw DegenerateInputError("threshold tuning needs at least three cases");
  if (grid.empty()) throw DegenerateInputError("threshold grid is empty");
}

ThresholdPoint evaluate_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd, double t) {
  ThresholdPoint point{t, 0.0, false};
  std::vector<double> means;
  means.reserve(drrs.size());
  try {
    for (const auto& drr : drrs) means.push_back(drr_mean_intensity(drr, t).mean);
    point.pcc = pearson(means, gt_bmd);
    point.valid = true;
  } catch (const EmptyRegionError&) {
  } catch (const UndefinedMetricError&) {
  }
  return point;
}

ThresholdTuning select_best(std::vector<ThresholdPoint> curve) {
  ThresholdTuning out;
  bool found = false;
  for (const auto& p : curve) {
    if (!p.valid) continue;
    if (!found || p.pcc > out.best_pcc || (p.pcc == out.best_pcc && p.threshold < out.best_threshold)) {
      out.best_threshold = p.threshold;
      out.best_pcc = p.pcc;
      found = true;
    }
  }
  if (!found) throw EmptyRegionError("no threshold in the grid is valid for every case");
  out.curve = std::move(curve);
  return out;
}

}  // namespace detail

ThresholdTuning tune_threshold(std::span<const Image2D> drrs, std::span<const double> gt_bmd,
                               std::span<const double> grid) {
  detail::check_tuning_inputs(drrs, gt_bmd, grid);
  std::vector<ThresholdPoint> curve(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t g = 0; g < n; ++g) curve[g] = detail::evaluate_threshold(drrs, gt_bmd, grid[g]);
  return detail::select_best(std::move(curve));
}

std::vector<double> default_threshold_grid(std::span<const Image2D> drrs, std::size_t count) {
  if (drrs.empty()) throw DegenerateInputError("no DRRs to derive a threshold grid from");
  if (count < 1) throw DegenerateInputError("threshold grid needs at least one point");
  std::vector<double> pooled;
  for (const auto& d : drrs) pooled.insert(pooled.end(), d.values().begin(), d.values().end());
  std::sort(pooled.begin(), pooled.end());
  const double pos = 0.99 * static_cast<double>(pooled.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, pooled.size() - 1);
  const double p99 = pooled[lo] + (pos - static_cast<double>(lo)) * (pooled[hi] - pooled[lo]);
  const double top = std::max(0.0, p99);
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = count == 1 ? 0.0 : top * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

BmdCalibration fit_bmd_line(std::span<const double> means, std::span<const double> gt_bmd, double threshold,
                            BmdTarget target) {
  if (means.size() != gt_bmd.size()) throw DegenerateInputError("means and ground truth differ in length");
  if (means.size() < 2) throw DegenerateInputError("BMD fit needs at least two cases");
  if (!(threshold >= 0.0)) throw RangeError("threshold must be >= 0");
  const auto n = static_cast<double>(means.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    mx += means[i];
    my += gt_bmd[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    sxx += (means[i] - mx) * (means[i] - mx);
    sxy += (means[i] - mx) * (gt_bmd[i] - my);
  }
  if (sxx == 0.0) throw RankDeficiencyError("all mean intensities are equal");
  BmdCalibration cal;
  cal.threshold = threshold;
  cal.target = target;
  cal.slope = sxy / sxx;
  cal.intercept = my - cal.slope * mx;
  try {
    cal.pcc_at_fit = pearson(means, gt_bmd);
  } catch (const UndefinedMetricError&) {
    cal.pcc_at_fit = 0.0;  // constant ground truth: the fitted line is flat
  }
  return cal;
}

double predict_bmd(const Image2D& drr, const BmdCalibration& calibration) {
  if (!std::isfinite(calibration.slope) || !std::isfinite(calibration.intercept) || !(calibration.threshold >= 0.0)) {
    throw InvariantError("invalid BMD calibration");
  }
  return calibration.slope * drr_mean_intensity(drr, calibration.threshold).mean + calibration.intercept;
}

void write_bmd_calibration(const BmdCalibration& c, const std::filesystem::path& path) {
  std::string text;
  text += "target = " + std::string(to_string(c.target)) + "\n";
  text += "threshold = " + format_double(c.threshold) + "\n";
  text += "slope = " + format_double(c.slope) + "\n";
  text += "intercept = " + format_double(c.intercept) + "\n";
  text += "pcc_at_fit = " + format_double(c.pcc_at_fit) + "\n";
  write_file_atomic(path, text);
}

BmdCalibration read_bmd_calibration(const std::filesystem::path& path) {
  const auto kv = KeyValueText::load(path, '=');
  BmdCalibration c;
  c.target = parse_bmd_target(kv.get("target"));
  c.threshold = kv.get_double("threshold");
  c.slope = kv.get_double("slope");
  c.intercept = kv.get_double("intercept");
  c.pcc_at_fit = kv.get_double("pcc_at_fit");
  if (!(c.threshold >= 0.0)) throw ParseError("threshold", "must be >= 0");
  if (!std::isfinite(c.slope)) throw ParseError("slope", "must be finite");
  if (!std::isfinite(c.intercept)) throw ParseError("intercept", "must be finite");
  return c;
}

void write_bmd_table(std::span<const BmdTableRow> rows, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"case_id", "pose", "mean_intensity", "pred_bmd", "gt_bmd"};
  for (const auto& r : rows) {
    table.rows.push_back(
        {r.case_id, r.pose, format_double(r.mean_intensity), format_double(r.pred_bmd), format_double(r.gt_bmd)});
  }
  write_file_atomic(path, table.to_string());
}

std::vector<BmdTableRow> read_bmd_table(const std::filesystem::path& path) {
  const auto table = CsvTable::load(path);
  const auto c_case = table.column("case_id");
  const auto c_pose = table.column("pose");
  const auto c_mean = table.column("mean_intensity");
  const auto c_pred = table.column("pred_bmd");
  const auto c_gt = table.column("gt_bmd");
  std::vector<BmdTableRow> rows;
  for (const auto& row : table.rows) {
    rows.push_back({row[c_case], row[c_pose], parse_double(row[c_mean], "mean_intensity"),
                    parse_double(row[c_pred], "pred_bmd"), parse_double(row[c_gt], "gt_bmd")});
  }
  return rows;
}

}  // namespace bmdx
