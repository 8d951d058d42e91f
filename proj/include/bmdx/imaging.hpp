// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace bmdx {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Dims3 {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const noexcept { return nx * ny * nz; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

struct Dims2 {
  std::size_t w = 0;
  std::size_t h = 0;

  std::size_t count() const noexcept { return w * h; }
  friend bool operator==(const Dims2&, const Dims2&) = default;
};

enum class VolumeUnit { kHounsfield, kDensityMgCm3, kDimensionless };
enum class ImageUnit { kDimensionless, kArealGCm2 };

std::string_view to_string(VolumeUnit unit);
std::string_view to_string(ImageUnit unit);
VolumeUnit parse_volume_unit(std::string_view text);
ImageUnit parse_image_unit(std::string_view text);

/// Regular voxel lattice in world millimetres. Voxel (i,j,k) is centred at
/// origin + (i*sx, j*sy, k*sz); each voxel covers +/- half a spacing around
/// its centre, so the lattice box is [origin - s/2, origin + (n - 1/2) s].
class Grid3 {
 public:
  Grid3() = default;
  Grid3(Dims3 dims, Vec3 spacing, Vec3 origin);

  const Dims3& dims() const noexcept { return dims_; }
  const Vec3& spacing() const noexcept { return spacing_; }
  const Vec3& origin() const noexcept { return origin_; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_.nx * (j + dims_.ny * k);
  }
  Vec3 voxel_center(std::size_t i, std::size_t j, std::size_t k) const;
  /// Centre of the lattice box; rotations in a rigid pose act about this point.
  Vec3 centroid() const;
  Vec3 box_min() const;
  Vec3 box_max() const;
  /// The eight corners of the lattice box.
  std::vector<Vec3> corners() const;

  bool same_lattice(const Grid3& other) const;

 private:
  Dims3 dims_;
  Vec3 spacing_ = Vec3::Ones();
  Vec3 origin_ = Vec3::Zero();
};

/// Scalar 3D grid (CT in HU, calibrated QCT in mg/cm^3, ...). Immutable once built.
class Volume3D {
 public:
  Volume3D(Grid3 grid, VolumeUnit unit, std::vector<double> values);
  static Volume3D filled(Grid3 grid, VolumeUnit unit, double value);

  const Grid3& grid() const noexcept { return grid_; }
  const Dims3& dims() const noexcept { return grid_.dims(); }
  VolumeUnit unit() const noexcept { return unit_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[grid_.index(i, j, k)];
  }

 private:
  Grid3 grid_;
  VolumeUnit unit_;
  std::vector<double> values_;
};

/// Binary 3D region on a lattice.
class Mask3D {
 public:
  Mask3D(Grid3 grid, std::vector<std::uint8_t> values);
  /// Accepts a volume whose values are exactly 0.0 or 1.0.
  static Mask3D from_volume(const Volume3D& volume);

  const Grid3& grid() const noexcept { return grid_; }
  const Dims3& dims() const noexcept { return grid_.dims(); }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t count() const noexcept;

  Volume3D to_volume() const;

 private:
  Grid3 grid_;
  std::vector<std::uint8_t> values_;
};

/// Row-major 2D image: value(x, y) = values[y * w + x].
class Image2D {
 public:
  Image2D(Dims2 dims, Vec2 spacing, ImageUnit unit, std::vector<double> values);
  static Image2D filled(Dims2 dims, Vec2 spacing, ImageUnit unit, double value);

  const Dims2& dims() const noexcept { return dims_; }
  std::size_t width() const noexcept { return dims_.w; }
  std::size_t height() const noexcept { return dims_.h; }
  const Vec2& spacing() const noexcept { return spacing_; }
  ImageUnit unit() const noexcept { return unit_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(std::size_t x, std::size_t y) const noexcept { return values_[y * dims_.w + x]; }
  double mean() const;

  /// Same dims/spacing/unit, new pixel values.
  Image2D with_values(std::vector<double> values) const;

 private:
  Dims2 dims_;
  Vec2 spacing_;
  ImageUnit unit_;
  std::vector<double> values_;
};

class Mask2D {
 public:
  Mask2D(Dims2 dims, std::vector<std::uint8_t> values);
  static Mask2D from_image(const Image2D& image);

  const Dims2& dims() const noexcept { return dims_; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  std::size_t count() const noexcept;

  Image2D to_image(Vec2 spacing = Vec2::Ones()) const;

 private:
  Dims2 dims_;
  std::vector<std::uint8_t> values_;
};

/// Columns [0, w/2) and [w/2, w); an odd extra column goes to the right half.
std::pair<Image2D, Image2D> split_xray(const Image2D& image);

/// Scale so the canvas is covered (shorter relative edge fits), keep the
/// centre aligned and crop the overhang. Bilinear, edge-clamped.
Image2D normalize_to_canvas(const Image2D& image, std::size_t target_w, std::size_t target_h);

/// v -> round(v * (2^bits - 1)) / (2^bits - 1) for v in [0, 1].
Image2D quantize_bits(const Image2D& image, int bits);

/// Pixels >= threshold.
Mask2D threshold_mask(const Image2D& image, double threshold);

}  // namespace bmdx
