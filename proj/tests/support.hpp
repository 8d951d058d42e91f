// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "bmdx/imaging.hpp"
#include "bmdx/projection.hpp"

namespace bmdx::test {

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline Image2D random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  return Image2D({w, h}, {1.0, 1.0}, ImageUnit::kDimensionless, random_values(w * h, seed, lo, hi));
}

inline Grid3 cube_grid(std::size_t n, double spacing) {
  const double half = 0.5 * (static_cast<double>(n) - 1.0) * spacing;
  return Grid3({n, n, n}, Vec3::Constant(spacing), Vec3::Constant(-half));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bmdx_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Sphere of radius r (mm) at the origin; voxel value = density x inside fraction (6^3 sub-samples).
inline Volume3D sphere_volume(std::size_t n, double spacing, double r, double rho) {
  const Grid3 g = cube_grid(n, spacing);
  std::vector<double> v(g.dims().count());
  const int ss = 6;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 c = g.voxel_center(i, j, k);
        int in = 0;
        for (int a = 0; a < ss; ++a) {
          for (int b = 0; b < ss; ++b) {
            for (int d = 0; d < ss; ++d) {
              const Vec3 p = c + spacing * (Vec3(a + 0.5, b + 0.5, d + 0.5) / ss - Vec3::Constant(0.5));
              in += p.norm() <= r ? 1 : 0;
            }
          }
        }
        v[g.index(i, j, k)] = rho * in / double(ss * ss * ss);
      }
    }
  }
  return Volume3D(g, VolumeUnit::kDensityMgCm3, v);
}

inline Volume3D random_volume(std::size_t n, std::uint64_t seed) {
  return Volume3D(cube_grid(n, 1.5), VolumeUnit::kDensityMgCm3, random_values(n * n * n, seed, 0, 500));
}

/// Parallel rays along +y onto a detector at y = 120.
inline ProjectionGeometry parallel_y(Dims2 dims, double pixel, double step) {
  ProjectionGeometry g;
  g.mode = ProjectionMode::kParallel;
  g.detector_dims = dims;
  g.detector_spacing = Vec2(pixel, pixel);
  g.detector_center = Vec3(0, 120, 0);
  g.ray_dir = Vec3::UnitY();
  g.step_mm = step;
  return g;
}

/// Two slab masks one empty voxel apart, and their union.
struct SeparatedMasks {
  Mask3D a, b, both;
};

inline SeparatedMasks separated_masks(const Grid3& grid) {
  std::vector<std::uint8_t> a(grid.dims().count(), 0), b(a), u(a);
  for (std::size_t k = 0; k < grid.dims().nz; ++k) {
    for (std::size_t j = 0; j < grid.dims().ny; ++j) {
      for (std::size_t i = 0; i < grid.dims().nx; ++i) {
        const auto idx = grid.index(i, j, k);
        if (i <= 6 && (j + k) % 3 != 0) a[idx] = 1;
        if (i >= 8 && (i + j) % 4 != 1) b[idx] = 1;
        u[idx] = a[idx] | b[idx];
      }
    }
  }
  return {Mask3D(grid, a), Mask3D(grid, b), Mask3D(grid, u)};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace bmdx::test
