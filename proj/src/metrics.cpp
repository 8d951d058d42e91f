// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "bmdx/error.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx {

PairedSeries::PairedSeries(std::vector<PairedRecord> records) : records_(std::move(records)) {
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& r : records_) {
    if (!std::isfinite(r.predicted) || !std::isfinite(r.ground_truth)) {
      throw InvariantError("paired series value for case '" + r.case_id + "' is not finite");
    }
    if (!keys.emplace(r.case_id, r.pose).second) {
      throw InvariantError("duplicate (case_id, pose) = (" + r.case_id + ", " + r.pose + ")");
    }
  }
}

std::vector<double> PairedSeries::predicted() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.predicted);
  return out;
}

std::vector<double> PairedSeries::ground_truth() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.ground_truth);
  return out;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_size(const PairedSeries& series, std::size_t n, const char* what) {
  if (series.size() < n) {
    throw DegenerateInputError(std::string(what) + " needs at least " + std::to_string(n) + " records");
  }
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInputError("pearson inputs differ in length");
  if (x.size() < 2) throw DegenerateInputError("pearson needs at least two points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

RegressionMetrics regression_metrics(const PairedSeries& series) {
  require_size(series, 3, "regression_metrics");
  const auto pred = series.predicted();
  const auto gt = series.ground_truth();
  RegressionMetrics m;
  m.pcc = pearson(pred, gt);

  const auto n = static_cast<double>(pred.size());
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) abs_sum += std::abs(pred[i] - gt[i]);
  m.mae = abs_sum / n;

  const double mx = mean_of(pred);
  const double my = mean_of(gt);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sxx += (pred[i] - mx) * (pred[i] - mx);
    sxy += (pred[i] - mx) * (gt[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = gt[i] - (slope * pred[i] + intercept);
    ssr += r * r;
  }
  m.see = std::sqrt(ssr / (n - 2.0));
  return m;
}

double icc(const PairedSeries& series) {
  require_size(series, 3, "icc");
  constexpr double k = 2.0;
  const auto n = static_cast<double>(series.size());
  double grand = 0.0;
  double col_pred = 0.0;
  double col_gt = 0.0;
  for (const auto& r : series.records()) {
    col_pred += r.predicted;
    col_gt += r.ground_truth;
  }
  grand = (col_pred + col_gt) / (k * n);
  col_pred /= n;
  col_gt /= n;

  double ss_rows = 0.0;
  double ss_total = 0.0;
  for (const auto& r : series.records()) {
    const double row_mean = 0.5 * (r.predicted + r.ground_truth);
    ss_rows += (row_mean - grand) * (row_mean - grand);
    ss_total += (r.predicted - grand) * (r.predicted - grand) + (r.ground_truth - grand) * (r.ground_truth - grand);
  }
  ss_rows *= k;
  const double ss_cols = n * ((col_pred - grand) * (col_pred - grand) + (col_gt - grand) * (col_gt - grand));
  const double ss_error = std::max(0.0, ss_total - ss_rows - ss_cols);

  const double ms_rows = ss_rows / (n - 1.0);
  const double ms_cols = ss_cols / (k - 1.0);
  const double ms_error = ss_error / ((n - 1.0) * (k - 1.0));
  const double denom = ms_rows + (k - 1.0) * ms_error + k * (ms_cols - ms_error) / n;
  if (!(denom > 0.0)) throw UndefinedMetricError("ICC undefined: no between-case variance");
  return (ms_rows - ms_error) / denom;
}

double rms_cv_percent(const PairedSeries& series) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_case;
  for (const auto& r : series.records()) {
    auto [it, fresh] = by_case.try_emplace(r.case_id);
    if (fresh) order.push_back(r.case_id);
    it->second.push_back(r.predicted);
  }
  if (order.empty()) throw DegenerateInputError("rms_cv needs at least one case");
  double sum_sq = 0.0;
  for (const auto& id : order) {
    const auto& v = by_case[id];
    if (v.size() < 2) throw DegenerateInputError("case '" + id + "' has fewer than two poses");
    const double m = mean_of(v);
    if (!(m > 0.0)) throw RangeError("case '" + id + "' has a non-positive mean prediction");
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double cv = std::sqrt(ss / static_cast<double>(v.size() - 1)) / m;
    sum_sq += cv * cv;
  }
  return 100.0 * std::sqrt(sum_sq / static_cast<double>(order.size()));
}

double dice(const Mask2D& a, const Mask2D& b) {
  if (a.dims() != b.dims()) throw DegenerateInputError("dice masks differ in dims");
  std::size_t inter = 0;
  std::size_t total = 0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    inter += static_cast<std::size_t>(va[i] & vb[i]);
    total += static_cast<std::size_t>(va[i]) + static_cast<std::size_t>(vb[i]);
  }
  if (total == 0) throw UndefinedMetricError("dice undefined for two empty masks");
  return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

DecompositionMetrics decomposition_metrics(const Image2D& gt, const Image2D& pred,
                                           std::span<const double> dice_thresholds) {
  if (gt.dims() != pred.dims()) throw DegenerateInputError("decomposition metrics need equal dims");
  const auto g = gt.values();
  const auto p = pred.values();
  double sse = 0.0;
  double peak = g[0];
  for (std::size_t i = 0; i < g.size(); ++i) {
    sse += (g[i] - p[i]) * (g[i] - p[i]);
    peak = std::max(peak, g[i]);
  }
  DecompositionMetrics out;
  const double mse = sse / static_cast<double>(g.size());
  out.psnr = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(peak * peak / mse);

  double dice_sum = 0.0;
  for (double t : dice_thresholds) {
    const auto a = threshold_mask(gt, t);
    const auto b = threshold_mask(pred, t);
    if (a.count() == 0 && b.count() == 0) continue;
    dice_sum += dice(a, b);
    ++out.thresholds_used;
  }
  if (out.thresholds_used == 0) throw UndefinedMetricError("every dice threshold left both masks empty");
  out.mean_dice = dice_sum / static_cast<double>(out.thresholds_used);
  return out;
}

std::vector<double> default_dice_thresholds(const Image2D& gt) {
  const double peak = *std::max_element(gt.values().begin(), gt.values().end());
  return {0.10 * peak, 0.25 * peak, 0.50 * peak, 0.75 * peak};
}

BlandAltmanReport bland_altman(const PairedSeries& series) {
  require_size(series, 3, "bland_altman");
  BlandAltmanReport rep;
  for (const auto& r : series.records()) rep.differences.push_back(r.predicted - r.ground_truth);
  const auto& d = rep.differences;
  const bool all_equal = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });
  if (all_equal) {
    rep.mean_diff = d[0];
    rep.sd_diff = 0.0;
  } else {
    rep.mean_diff = mean_of(d);
    double ss = 0.0;
    for (double v : d) ss += (v - rep.mean_diff) * (v - rep.mean_diff);
    rep.sd_diff = std::sqrt(ss / static_cast<double>(d.size() - 1));
  }
  rep.lower = rep.mean_diff - 1.96 * rep.sd_diff;
  rep.upper = rep.mean_diff + 1.96 * rep.sd_diff;

  // side: +1 above the upper limit, -1 below the lower limit, 0 inside.
  std::vector<int> side(d.size(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > rep.upper) side[i] = 1;
    if (d[i] < rep.lower) side[i] = -1;
    rep.sample_outlier.push_back(side[i] != 0);
  }

  std::vector<std::string> order;
  std::map<std::string, std::pair<int, bool>> case_side;  // first side, still consistent
  const auto records = series.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, fresh] = case_side.try_emplace(records[i].case_id, side[i], side[i] != 0);
    if (fresh) {
      order.push_back(records[i].case_id);
    } else if (side[i] != it->second.first) {
      it->second.second = false;
    }
  }
  for (const auto& id : order) {
    if (case_side[id].second) rep.case_outliers.push_back(id);
  }
  return rep;
}

void write_metrics_csv(std::span<const MetricRow> rows, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"metric", "value"};
  for (const auto& row : rows) table.rows.push_back({row.metric, format_double(row.value)});
  write_file_atomic(path, table.to_string());
}

void write_bland_altman_csv(const PairedSeries& series, const BlandAltmanReport& report,
                            const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"case_id", "pose", "mean", "difference", "outlier", "case_outlier"};
  const auto records = series.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const bool case_flag =
        std::find(report.case_outliers.begin(), report.case_outliers.end(), r.case_id) != report.case_outliers.end();
    table.rows.push_back({r.case_id, r.pose, format_double(0.5 * (r.predicted + r.ground_truth)),
                          format_double(report.differences[i]), report.sample_outlier[i] ? "1" : "0",
                          case_flag ? "1" : "0"});
  }
  write_file_atomic(path, table.to_string());
}

}  // namespace bmdx
