// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx {

CalibrationLine fit_calibration(std::span<const double> hu_means, std::span<const double> densities) {
  if (hu_means.size() != densities.size()) throw DegenerateInputError("HU and density lists differ in length");
  const std::size_t n = hu_means.size();
  if (n < 2) throw DegenerateInputError("calibration needs at least two rods");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(hu_means[i]) || !std::isfinite(densities[i])) {
      throw InvariantError("calibration samples must be finite");
    }
  }

  // Centred sums keep the fit well conditioned for HU offsets in the thousands.
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += hu_means[i];
    mean_y += densities[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = hu_means[i] - mean_x;
    sxx += dx * dx;
    sxy += dx * (densities[i] - mean_y);
  }
  if (std::all_of(hu_means.begin(), hu_means.end(), [&](double v) { return v == hu_means[0]; }) || sxx == 0.0) {
    throw RankDeficiencyError("all rod HU values are identical");
  }

  CalibrationLine line;
  line.slope = sxy / sxx;
  line.intercept = mean_y - line.slope * mean_x;
  line.n_samples = n;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = densities[i] - line(hu_means[i]);
    ssr += r * r;
  }
  line.residual_rmse = std::sqrt(ssr / static_cast<double>(n));
  return line;
}

CalibrationLine fit_calibration(std::span<const RodMeasurement> rods) {
  std::vector<double> hu;
  std::vector<double> density;
  for (const auto& rod : rods) {
    hu.push_back(rod.hu_mean);
    density.push_back(rod.density_mg_cm3);
  }
  return fit_calibration(hu, density);
}

Volume3D apply_calibration(const Volume3D& hu_volume, const CalibrationLine& line) {
  if (hu_volume.unit() != VolumeUnit::kHounsfield) {
    throw UnitMismatchError("apply_calibration expects a HOUNSFIELD volume, got " +
                            std::string(to_string(hu_volume.unit())));
  }
  if (!std::isfinite(line.slope) || !std::isfinite(line.intercept)) {
    throw InvariantError("calibration line must be finite");
  }
  const auto src = hu_volume.values();
  std::vector<double> out(src.size());
  const auto n = static_cast<std::ptrdiff_t>(src.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    out[v] = std::max(0.0, line(src[v]));
  }
  return Volume3D(hu_volume.grid(), VolumeUnit::kDensityMgCm3, std::move(out));
}

std::vector<RodMeasurement> read_rod_table(const std::filesystem::path& path) {
  const auto table = CsvTable::load(path);
  const auto c_id = table.column("rod_id");
  const auto c_hu = table.column("hu_mean");
  const auto c_density = table.column("density_mg_cm3");
  std::vector<RodMeasurement> rods;
  for (const auto& row : table.rows) {
    rods.push_back({row[c_id], parse_double(row[c_hu], "hu_mean"), parse_double(row[c_density], "density_mg_cm3")});
  }
  return rods;
}

void write_rod_table(std::span<const RodMeasurement> rods, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"rod_id", "hu_mean", "density_mg_cm3"};
  for (const auto& rod : rods) {
    table.rows.push_back({rod.rod_id, format_double(rod.hu_mean), format_double(rod.density_mg_cm3)});
  }
  write_file_atomic(path, table.to_string());
}

void write_calibration_line(const CalibrationLine& line, const std::filesystem::path& path) {
  std::string text;
  text += "slope = " + format_double(line.slope) + "\n";
  text += "intercept = " + format_double(line.intercept) + "\n";
  text += "residual_rmse = " + format_double(line.residual_rmse) + "\n";
  text += "n_samples = " + std::to_string(line.n_samples) + "\n";
  write_file_atomic(path, text);
}

CalibrationLine read_calibration_line(const std::filesystem::path& path) {
  const auto kv = KeyValueText::load(path, '=');
  CalibrationLine line;
  line.slope = kv.get_double("slope");
  line.intercept = kv.get_double("intercept");
  line.residual_rmse = kv.get_double("residual_rmse");
  const auto n = kv.get_int("n_samples");
  if (n < 2) throw ParseError("n_samples", "must be >= 2");
  line.n_samples = static_cast<std::size_t>(n);
  if (!std::isfinite(line.slope)) throw ParseError("slope", "must be finite");
  if (!(line.residual_rmse >= 0.0)) throw ParseError("residual_rmse", "must be >= 0");
  return line;
}

}  // namespace bmdx
