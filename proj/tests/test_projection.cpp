// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/parallel.hpp"
#include "bmdx/projection.hpp"
#include "bmdx/reference.hpp"
#include "support.hpp"

using namespace bmdx;

using test::parallel_y;
using test::random_volume;
using test::sphere_volume;

TEST_SUITE("projection") {
  TEST_CASE("sample_trilinear") {
    const auto c = Volume3D::filled(test::cube_grid(4, 2.0), VolumeUnit::kDensityMgCm3, 42.0);
    CHECK(sample_trilinear(c, Vec3(0.3, -1.7, 2.2)) == 42.0);
    CHECK(sample_trilinear(c, Vec3(100, 0, 0)) == 0.0);

    const auto r = random_volume(5, 3);
    const auto& g = r.grid();
    for (std::size_t i = 0; i < 5; ++i) CHECK(sample_trilinear(r, g.voxel_center(i, 2, 4)) == r.at(i, 2, 4));

    const Grid3 two({2, 1, 1}, Vec3::Ones(), Vec3::Zero());
    const Volume3D ramp(two, VolumeUnit::kDimensionless, {0.0, 1.0});
    CHECK(sample_trilinear(ramp, Vec3(0.5, 0, 0)) == 0.5);
  }

  TEST_CASE("uniform cube integrates to 1 g/cm2") {
    const auto cube = Volume3D::filled(test::cube_grid(100, 1.0), VolumeUnit::kDensityMgCm3, 100.0);
    const auto g = parallel_y({5, 5}, 10.0, 0.5);
    const auto drr = render_drr(cube, g, {});
    CHECK(drr.unit() == ImageUnit::kArealGCm2);
    for (double v : drr.values()) CHECK(std::abs(v - 1.0) < 0.005);
    auto fine = g;
    fine.step_mm = 0.25;
    const auto drr2 = render_drr(cube, fine, {});
    CHECK(std::abs(drr2.values()[12] / drr.values()[12] - 1.0) < 0.002);
  }

  TEST_CASE("sphere chord oracle") {
    const double r = 30.0;
    const double rho = 200.0;
    const auto sphere = sphere_volume(72, 1.0, r, rho);
    auto g = parallel_y({9, 1}, 3.0, 0.25);
    const auto drr = render_drr(sphere, g, {});
    for (std::size_t x = 0; x < 9; ++x) {
      const double d = std::abs((static_cast<double>(x) - 4.0) * 3.0);
      const double chord = 2.0 * std::sqrt(r * r - d * d);
      const double expected = rho * chord * 1e-4;
      CHECK(std::abs(drr.at(x, 0) / expected - 1.0) < 0.01);
    }
  }

  TEST_CASE("pinhole chord through the sphere centre") {
    const double r = 30.0;
    const auto sphere = sphere_volume(72, 1.0, r, 150.0);
    ProjectionGeometry g;
    g.mode = ProjectionMode::kPinhole;
    g.detector_dims = {1, 1};
    g.detector_center = Vec3(0, 300, 0);
    g.source = Vec3(0, -600, 0);
    g.step_mm = 0.25;
    const auto drr = render_drr(sphere, g, {});
    CHECK(std::abs(drr.values()[0] / (150.0 * 2 * r * 1e-4) - 1.0) < 0.01);
  }

  TEST_CASE("masks") {
    const auto v = random_volume(16, 4);
    const auto g = parallel_y({12, 12}, 2.0, 0.5);
    const Mask3D none(v.grid(), std::vector<std::uint8_t>(v.grid().dims().count(), 0));
    const auto empty = render_drr(v, &none, g, {});
    for (double x : empty.values()) CHECK(x == 0.0);
    const Mask3D all(v.grid(), std::vector<std::uint8_t>(v.grid().dims().count(), 1));
    const auto a = render_drr(v, &all, g, {});
    const auto b = render_drr(v, g, {});
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    const Mask3D other(test::cube_grid(8, 1.0), std::vector<std::uint8_t>(512, 1));
    CHECK_THROWS_AS(render_drr(v, &other, g, {}), InvariantError);
  }

  TEST_CASE("linearity") {
    const auto v = random_volume(16, 5);
    std::vector<double> scaled(v.values().begin(), v.values().end());
    for (double& x : scaled) x *= 3.7;
    const Volume3D sv(v.grid(), v.unit(), scaled);
    auto g = parallel_y({10, 10}, 2.3, 0.7);
    const RigidTransform6 pose{3, -4, 10, 1, 2, -1};
    const auto a = render_drr(v, g, pose);
    const auto b = render_drr(sv, g, pose);
    for (std::size_t i = 0; i < a.values().size(); ++i) {
      CHECK(std::abs(b.values()[i] - 3.7 * a.values()[i]) <= 1e-12 * std::abs(3.7 * a.values()[i]));
    }
  }

  TEST_CASE("mask superposition for separated regions") {
    const auto v = random_volume(16, 6);
    // Slabs one empty voxel apart: no sample sees both masks.
    const auto [ma, mb, mu] = test::separated_masks(v.grid());
    const auto g = parallel_y({12, 12}, 2.0, 0.5);
    const RigidTransform6 pose{0, 0, 7, 0.5, 0, 0};
    const auto ra = render_drr(v, &ma, g, pose);
    const auto rb = render_drr(v, &mb, g, pose);
    const auto ru = render_drr(v, &mu, g, pose);
    for (std::size_t i = 0; i < ru.values().size(); ++i) {
      CHECK(std::abs(ra.values()[i] + rb.values()[i] - ru.values()[i]) < 1e-9);
    }
  }

  TEST_CASE("pose moves the volume") {
    const auto sphere = sphere_volume(48, 1.0, 10.0, 100.0);
    auto g = parallel_y({33, 33}, 1.0, 0.5);
    const auto centred = render_drr(sphere, g, {});
    const auto moved = render_drr(sphere, g, {0, 0, 0, 5.0, 0, 0});
    // A +5 mm x shift moves the image 5 pixels along u = x.
    CHECK(std::abs(moved.at(21, 16) - centred.at(16, 16)) < 1e-9);
  }

  TEST_CASE("geometry validation and text roundtrip") {
    auto g = parallel_y({4, 3}, 1.5, 0.5);
    g.basis_v = Vec3(0, 0.1, 1);
    CHECK_THROWS_AS(g.validate(), InvariantError);
    g = parallel_y({4, 3}, 1.5, 0.0);
    CHECK_THROWS_AS(g.validate(), InvariantError);
    g = parallel_y({4, 3}, 1.5, 0.5);
    g.ray_dir = Vec3::UnitX();
    CHECK_THROWS_AS(g.validate(), InvariantError);
    ProjectionGeometry p;
    p.mode = ProjectionMode::kPinhole;
    p.detector_center = Vec3(0, 100, 0);
    p.source = Vec3(5, 100, 3);
    CHECK_THROWS_AS(p.validate(), InvariantError);

    g = parallel_y({4, 3}, 1.5, 0.5);
    const auto back = geometry_from_text(KeyValueText::parse(geometry_to_text(g), '='));
    CHECK(back.detector_dims == g.detector_dims);
    CHECK(back.detector_center == g.detector_center);
    CHECK(back.step_mm == g.step_mm);
  }

  TEST_CASE("parallel render is bit-identical to the serial reference at any thread count") {
    const auto v = random_volume(20, 7);
    const Mask3D m = [&] {
      std::vector<std::uint8_t> bits(v.grid().dims().count());
      const auto r = test::random_values(bits.size(), 8);
      for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = r[i] > 0.4 ? 1 : 0;
      return Mask3D(v.grid(), bits);
    }();
    ProjectionGeometry pin;
    pin.mode = ProjectionMode::kPinhole;
    pin.detector_dims = {24, 20};
    pin.detector_spacing = Vec2(2.5, 2.5);
    pin.detector_center = Vec3(0, 200, 0);
    pin.source = Vec3(0, -500, 0);
    pin.step_mm = 0.8;
    for (const auto& g : {parallel_y({24, 20}, 1.7, 0.6), pin}) {
      const RigidTransform6 pose{5, -3, 12, 2, -1, 4};
      const auto ref = serial::render_drr(v, &m, g, pose);
      for (int t : {1, 2, 4}) {
        ScopedThreadCount threads(t);
        const auto got = render_drr(v, &m, g, pose);
        CHECK(std::equal(got.values().begin(), got.values().end(), ref.values().begin()));
      }
    }
  }
}
