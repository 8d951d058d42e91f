// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "bmdx/imaging.hpp"

namespace bmdx {

/// Raw payload encoding. f32le is the default on-disk format; f64le exists
/// for intermediate products that must round-trip doubles exactly.
enum class SampleType { kF32LE, kF64LE };

// Volume: text header `<name>.v3h` (dims, spacing, origin, unit, dtype, data)
// and raw payload `<name>.v3r` next to it, x-fastest.
Volume3D read_volume(const std::filesystem::path& header_path);
void write_volume(const Volume3D& volume, const std::filesystem::path& header_path,
                  SampleType dtype = SampleType::kF32LE);

// Image: `<name>.i2h` (dims, spacing, unit, dtype, data) + `<name>.i2r`, row-major.
Image2D read_image(const std::filesystem::path& header_path);
void write_image(const Image2D& image, const std::filesystem::path& header_path,
                 SampleType dtype = SampleType::kF32LE);

// Masks travel as volumes/images holding exactly 0.0 / 1.0.
Mask3D read_mask3d(const std::filesystem::path& header_path);
void write_mask3d(const Mask3D& mask, const std::filesystem::path& header_path);

}  // namespace bmdx
