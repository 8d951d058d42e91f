// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bmdx/error.hpp"

namespace bmdx {

std::string_view to_string(VolumeUnit unit) {
  switch (unit) {
    case VolumeUnit::kHounsfield: return "HOUNSFIELD";
    case VolumeUnit::kDensityMgCm3: return "DENSITY_MG_CM3";
    case VolumeUnit::kDimensionless: return "DIMENSIONLESS";
  }
  return "DIMENSIONLESS";
}

std::string_view to_string(ImageUnit unit) {
  switch (unit) {
    case ImageUnit::kDimensionless: return "DIMENSIONLESS";
    case ImageUnit::kArealGCm2: return "AREAL_G_CM2";
  }
  return "DIMENSIONLESS";
}

VolumeUnit parse_volume_unit(std::string_view text) {
  if (text == "HOUNSFIELD") return VolumeUnit::kHounsfield;
  if (text == "DENSITY_MG_CM3") return VolumeUnit::kDensityMgCm3;
  if (text == "DIMENSIONLESS") return VolumeUnit::kDimensionless;
  throw ParseError("unit", "unknown volume unit '" + std::string(text) + "'");
}

ImageUnit parse_image_unit(std::string_view text) {
  if (text == "DIMENSIONLESS") return ImageUnit::kDimensionless;
  if (text == "AREAL_G_CM2") return ImageUnit::kArealGCm2;
  throw ParseError("unit", "unknown image unit '" + std::string(text) + "'");
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvariantError(std::string(what) + " contains a non-finite value");
  }
}

std::vector<std::uint8_t> binarize_exact(std::span<const double> values, const char* what) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (values[n] == 0.0) {
      out[n] = 0;
    } else if (values[n] == 1.0) {
      out[n] = 1;
    } else {
      throw InvariantError(std::string(what) + " value is neither 0 nor 1");
    }
  }
  return out;
}

// Linear interpolation written so that a == b returns a exactly.
double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

// --- Grid3 ---------------------------------------------------------------

Grid3::Grid3(Dims3 dims, Vec3 spacing, Vec3 origin) : dims_(dims), spacing_(spacing), origin_(origin) {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw InvariantError("volume dims must be >= 1");
  for (int a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw InvariantError("volume spacing must be finite and > 0");
    }
    if (!std::isfinite(origin[a])) throw InvariantError("volume origin must be finite");
  }
}

Vec3 Grid3::voxel_center(std::size_t i, std::size_t j, std::size_t k) const {
  return origin_ + Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k))
                       .cwiseProduct(spacing_);
}

Vec3 Grid3::centroid() const {
  const Vec3 half_extent(static_cast<double>(dims_.nx - 1), static_cast<double>(dims_.ny - 1),
                         static_cast<double>(dims_.nz - 1));
  return origin_ + 0.5 * half_extent.cwiseProduct(spacing_);
}

Vec3 Grid3::box_min() const { return origin_ - 0.5 * spacing_; }

Vec3 Grid3::box_max() const {
  const Vec3 n(static_cast<double>(dims_.nx), static_cast<double>(dims_.ny), static_cast<double>(dims_.nz));
  return origin_ + (n - 0.5 * Vec3::Ones()).cwiseProduct(spacing_);
}

std::vector<Vec3> Grid3::corners() const {
  const Vec3 lo = box_min();
  const Vec3 hi = box_max();
  std::vector<Vec3> out;
  out.reserve(8);
  for (int c = 0; c < 8; ++c) {
    out.emplace_back((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(), (c & 4) ? hi.z() : lo.z());
  }
  return out;
}

bool Grid3::same_lattice(const Grid3& other) const {
  return dims_ == other.dims_ && spacing_ == other.spacing_ && origin_ == other.origin_;
}

// --- Volume3D / Mask3D ----------------------------------------------------

Volume3D::Volume3D(Grid3 grid, VolumeUnit unit, std::vector<double> values)
    : grid_(std::move(grid)), unit_(unit), values_(std::move(values)) {
  if (values_.size() != grid_.dims().count()) {
    throw InvariantError("volume has " + std::to_string(values_.size()) + " values, dims require " +
                         std::to_string(grid_.dims().count()));
  }
  require_finite(values_, "volume");
}

Volume3D Volume3D::filled(Grid3 grid, VolumeUnit unit, double value) {
  std::vector<double> values(grid.dims().count(), value);
  return Volume3D(std::move(grid), unit, std::move(values));
}

Mask3D::Mask3D(Grid3 grid, std::vector<std::uint8_t> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.dims().count()) throw InvariantError("mask size does not match its dims");
  for (auto v : values_) {
    if (v > 1) throw InvariantError("mask value is neither 0 nor 1");
  }
}

Mask3D Mask3D::from_volume(const Volume3D& volume) {
  return Mask3D(volume.grid(), binarize_exact(volume.values(), "mask"));
}

std::size_t Mask3D::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

Volume3D Mask3D::to_volume() const {
  return Volume3D(grid_, VolumeUnit::kDimensionless, std::vector<double>(values_.begin(), values_.end()));
}

// --- Image2D / Mask2D -----------------------------------------------------

Image2D::Image2D(Dims2 dims, Vec2 spacing, ImageUnit unit, std::vector<double> values)
    : dims_(dims), spacing_(spacing), unit_(unit), values_(std::move(values)) {
  if (dims.w == 0 || dims.h == 0) throw InvariantError("image dims must be >= 1");
  if (!(spacing[0] > 0.0 && spacing[1] > 0.0) || !spacing.allFinite()) {
    throw InvariantError("image spacing must be finite and > 0");
  }
  if (values_.size() != dims_.count()) {
    throw InvariantError("image has " + std::to_string(values_.size()) + " values, dims require " +
                         std::to_string(dims_.count()));
  }
  require_finite(values_, "image");
}

Image2D Image2D::filled(Dims2 dims, Vec2 spacing, ImageUnit unit, double value) {
  return Image2D(dims, spacing, unit, std::vector<double>(dims.count(), value));
}

double Image2D::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

Image2D Image2D::with_values(std::vector<double> values) const {
  return Image2D(dims_, spacing_, unit_, std::move(values));
}

Mask2D::Mask2D(Dims2 dims, std::vector<std::uint8_t> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.count()) throw InvariantError("mask size does not match its dims");
  for (auto v : values_) {
    if (v > 1) throw InvariantError("mask value is neither 0 nor 1");
  }
}

Mask2D Mask2D::from_image(const Image2D& image) {
  return Mask2D(image.dims(), binarize_exact(image.values(), "mask"));
}

std::size_t Mask2D::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

Image2D Mask2D::to_image(Vec2 spacing) const {
  return Image2D(dims_, spacing, ImageUnit::kDimensionless, std::vector<double>(values_.begin(), values_.end()));
}

// --- preprocessing --------------------------------------------------------

std::pair<Image2D, Image2D> split_xray(const Image2D& image) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  if (w < 2) throw DegenerateInputError("split_xray needs width >= 2");
  const std::size_t wl = w / 2;
  const std::size_t wr = w - wl;
  std::vector<double> left(wl * h);
  std::vector<double> right(wr * h);
  const auto src = image.values();
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y * w), wl, left.begin() + static_cast<std::ptrdiff_t>(y * wl));
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y * w + wl), wr,
                right.begin() + static_cast<std::ptrdiff_t>(y * wr));
  }
  return {Image2D({wl, h}, image.spacing(), image.unit(), std::move(left)),
          Image2D({wr, h}, image.spacing(), image.unit(), std::move(right))};
}

Image2D normalize_to_canvas(const Image2D& image, std::size_t target_w, std::size_t target_h) {
  if (target_w == 0 || target_h == 0) throw DegenerateInputError("canvas dims must be >= 1");
  const double w = static_cast<double>(image.width());
  const double h = static_cast<double>(image.height());
  const double scale = std::max(static_cast<double>(target_w) / w, static_cast<double>(target_h) / h);

  const auto sample = [&](double sx, double sy) {
    const double cx = std::clamp(sx, 0.0, w - 1.0);
    const double cy = std::clamp(sy, 0.0, h - 1.0);
    const auto x0 = static_cast<std::size_t>(std::floor(cx));
    const auto y0 = static_cast<std::size_t>(std::floor(cy));
    const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double fx = cx - static_cast<double>(x0);
    const double fy = cy - static_cast<double>(y0);
    const double top = lerp(image.at(x0, y0), image.at(x1, y0), fx);
    const double bottom = lerp(image.at(x0, y1), image.at(x1, y1), fx);
    return lerp(top, bottom, fy);
  };

  std::vector<double> out(target_w * target_h);
  const double half_tw = 0.5 * static_cast<double>(target_w);
  const double half_th = 0.5 * static_cast<double>(target_h);
  for (std::size_t y = 0; y < target_h; ++y) {
    const double sy = (static_cast<double>(y) + 0.5 - half_th) / scale + 0.5 * h - 0.5;
    for (std::size_t x = 0; x < target_w; ++x) {
      const double sx = (static_cast<double>(x) + 0.5 - half_tw) / scale + 0.5 * w - 0.5;
      out[y * target_w + x] = sample(sx, sy);
    }
  }
  return Image2D({target_w, target_h}, image.spacing() / scale, image.unit(), std::move(out));
}

Image2D quantize_bits(const Image2D& image, int bits) {
  if (bits < 1 || bits > 16) throw RangeError("bits must be in 1..16");
  const double levels = std::ldexp(1.0, bits) - 1.0;
  std::vector<double> out(image.values().size());
  std::size_t n = 0;
  for (double v : image.values()) {
    if (v < 0.0 || v > 1.0) throw RangeError("quantize_bits expects values in [0, 1]");
    out[n++] = std::round(v * levels) / levels;
  }
  return image.with_values(std::move(out));
}

Mask2D threshold_mask(const Image2D& image, double threshold) {
  std::vector<std::uint8_t> out(image.values().size());
  std::size_t n = 0;
  for (double v : image.values()) out[n++] = v >= threshold ? 1 : 0;
  return Mask2D(image.dims(), std::move(out));
}

}  // namespace bmdx
