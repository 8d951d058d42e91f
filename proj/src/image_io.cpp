// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "bmdx/error.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx {

namespace {

static_assert(std::endian::native == std::endian::little, "raw payloads are read as little-endian");

std::string_view dtype_name(SampleType dtype) { return dtype == SampleType::kF32LE ? "f32le" : "f64le"; }

SampleType parse_dtype(const std::string& text) {
  if (text == "f32le") return SampleType::kF32LE;
  if (text == "f64le") return SampleType::kF64LE;
  throw ParseError("dtype", "unsupported dtype '" + text + "'");
}

std::size_t sample_bytes(SampleType dtype) { return dtype == SampleType::kF32LE ? 4 : 8; }

std::string encode(std::span<const double> values, SampleType dtype) {
  std::string bytes(values.size() * sample_bytes(dtype), '\0');
  char* dst = bytes.data();
  for (double v : values) {
    if (dtype == SampleType::kF32LE) {
      const auto f = static_cast<float>(v);
      std::memcpy(dst, &f, 4);
      dst += 4;
    } else {
      std::memcpy(dst, &v, 8);
      dst += 8;
    }
  }
  return bytes;
}

std::vector<double> decode(const std::string& bytes, SampleType dtype, std::size_t expected) {
  const std::size_t width = sample_bytes(dtype);
  if (bytes.size() != expected * width) {
    throw ParseError("data", "payload holds " + std::to_string(bytes.size() / width) + " samples (" +
                                 std::to_string(bytes.size()) + " bytes), dims require " + std::to_string(expected));
  }
  std::vector<double> values(expected);
  const char* src = bytes.data();
  for (std::size_t n = 0; n < expected; ++n) {
    if (dtype == SampleType::kF32LE) {
      float f;
      std::memcpy(&f, src + 4 * n, 4);
      values[n] = f;
    } else {
      std::memcpy(&values[n], src + 8 * n, 8);
    }
    if (!std::isfinite(values[n])) throw ParseError("data", "non-finite sample at index " + std::to_string(n));
  }
  return values;
}

std::size_t positive_count(long long v, const std::string& key) {
  if (v < 1) throw ParseError(key, "dimension must be >= 1");
  return static_cast<std::size_t>(v);
}

std::string join3(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

std::filesystem::path payload_path(const std::filesystem::path& header_path, const char* ext) {
  auto p = header_path;
  p.replace_extension(ext);
  return p;
}

// Non-binary mask payloads are reported against the data key.
template <typename F>
auto with_key(const char* key, F&& f) {
  try {
    return f();
  } catch (const InvariantError& e) {
    throw ParseError(key, e.what());
  }
}

}  // namespace

Volume3D read_volume(const std::filesystem::path& header_path) {
  const auto header = KeyValueText::load(header_path, ':');
  const auto dims_raw = header.get_ints("dims", 3);
  const Dims3 dims{positive_count(dims_raw[0], "dims"), positive_count(dims_raw[1], "dims"),
                   positive_count(dims_raw[2], "dims")};
  const auto spacing = header.get_doubles("spacing", 3);
  const auto origin = header.get_doubles("origin", 3);
  const auto unit = parse_volume_unit(header.get("unit"));
  const auto dtype = parse_dtype(header.get("dtype"));
  const auto& data_name = header.get("data");

  Grid3 grid(dims, Vec3(spacing[0], spacing[1], spacing[2]), Vec3(origin[0], origin[1], origin[2]));
  const auto data_path = header_path.parent_path() / data_name;
  std::string bytes;
  try {
    bytes = read_file(data_path);
  } catch (const ParseError&) {
    throw ParseError("data", "cannot open payload " + data_path.string());
  }
  auto values = decode(bytes, dtype, dims.count());
  return Volume3D(std::move(grid), unit, std::move(values));
}

void write_volume(const Volume3D& volume, const std::filesystem::path& header_path, SampleType dtype) {
  const auto data_path = payload_path(header_path, ".v3r");
  const auto& g = volume.grid();
  std::string header;
  header += "dims: " + std::to_string(g.dims().nx) + " " + std::to_string(g.dims().ny) + " " +
            std::to_string(g.dims().nz) + "\n";
  header += "spacing: " + join3(g.spacing()) + "\n";
  header += "origin: " + join3(g.origin()) + "\n";
  header += "unit: " + std::string(to_string(volume.unit())) + "\n";
  header += "dtype: " + std::string(dtype_name(dtype)) + "\n";
  header += "data: " + data_path.filename().string() + "\n";
  write_file_atomic(data_path, encode(volume.values(), dtype));
  write_file_atomic(header_path, header);
}

Image2D read_image(const std::filesystem::path& header_path) {
  const auto header = KeyValueText::load(header_path, ':');
  const auto dims_raw = header.get_ints("dims", 2);
  const Dims2 dims{positive_count(dims_raw[0], "dims"), positive_count(dims_raw[1], "dims")};
  const auto spacing = header.get_doubles("spacing", 2);
  const auto unit = parse_image_unit(header.get("unit"));
  const auto dtype = parse_dtype(header.get("dtype"));
  const auto data_path = header_path.parent_path() / header.get("data");
  std::string bytes;
  try {
    bytes = read_file(data_path);
  } catch (const ParseError&) {
    throw ParseError("data", "cannot open payload " + data_path.string());
  }
  auto values = decode(bytes, dtype, dims.count());
  return Image2D(dims, Vec2(spacing[0], spacing[1]), unit, std::move(values));
}

void write_image(const Image2D& image, const std::filesystem::path& header_path, SampleType dtype) {
  const auto data_path = payload_path(header_path, ".i2r");
  std::string header;
  header += "dims: " + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n";
  header += "spacing: " + format_double(image.spacing()[0]) + " " + format_double(image.spacing()[1]) + "\n";
  header += "unit: " + std::string(to_string(image.unit())) + "\n";
  header += "dtype: " + std::string(dtype_name(dtype)) + "\n";
  header += "data: " + data_path.filename().string() + "\n";
  write_file_atomic(data_path, encode(image.values(), dtype));
  write_file_atomic(header_path, header);
}

Mask3D read_mask3d(const std::filesystem::path& header_path) {
  const auto volume = read_volume(header_path);
  return with_key("data", [&] { return Mask3D::from_volume(volume); });
}

void write_mask3d(const Mask3D& mask, const std::filesystem::path& header_path) {
  write_volume(mask.to_volume(), header_path, SampleType::kF32LE);
}

}  // namespace bmdx
