// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/losses.hpp"
#include "bmdx/registration.hpp"
#include "bmdx/synth.hpp"
#include "support.hpp"

using namespace bmdx;

namespace {

Image2D from_fn(std::size_t w, std::size_t h, double (*f)(double, double)) {
  std::vector<double> v(w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) v[y * w + x] = f(static_cast<double>(x), static_cast<double>(y));
  return Image2D({w, h}, {1, 1}, ImageUnit::kDimensionless, v);
}

Image2D blob(double cx) {
  std::vector<double> v(32 * 32);
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) v[y * 32 + x] = std::exp(-(std::pow(x - cx, 2) + std::pow(y - 15.5, 2)) / 30.0);
  return Image2D({32, 32}, {1, 1}, ImageUnit::kDimensionless, v);
}

// Plain brute-force NCC in long double.
double ncc_oracle(std::span<const double> a, std::span<const double> b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

ProjectionGeometry pinhole64() {
  ProjectionGeometry g;
  g.mode = ProjectionMode::kPinhole;
  g.detector_dims = {64, 64};
  g.detector_spacing = Vec2(3.2, 3.2);
  g.detector_center = Vec3(0, 300, 0);
  g.source = Vec3(0, -700, 0);
  g.step_mm = 2.0;
  return g;
}

}  // namespace

TEST_SUITE("registration") {
  TEST_CASE("gradient_image") {
    const auto c = gradient_image(Image2D::filled({4, 3}, {1, 1}, ImageUnit::kDimensionless, 7.0));
    for (double v : c.gx.values()) CHECK(v == 0.0);
    for (double v : c.gy.values()) CHECK(v == 0.0);

    const auto ramp = gradient_image(from_fn(6, 4, [](double x, double) { return x; }));
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 6; ++x) CHECK(ramp.gx.at(x, y) == 1.0);

    const auto r = test::random_image(5, 5, 11);
    const auto g = gradient_image(r);
    for (std::size_t y = 0; y < 5; ++y) {
      for (std::size_t x = 0; x < 5; ++x) {
        const double ex = x == 0 ? r.at(1, y) - r.at(0, y)
                          : x == 4 ? r.at(4, y) - r.at(3, y)
                                   : (r.at(x + 1, y) - r.at(x - 1, y)) / 2;
        const double ey = y == 0 ? r.at(x, 1) - r.at(x, 0)
                          : y == 4 ? r.at(x, 4) - r.at(x, 3)
                                   : (r.at(x, y + 1) - r.at(x, y - 1)) / 2;
        CHECK(g.gx.at(x, y) == ex);
        CHECK(g.gy.at(x, y) == ey);
      }
    }
    CHECK_THROWS_AS(gradient_image(test::random_image(1, 5, 1)), DegenerateInputError);
  }

  TEST_CASE("ncc examples and invariants") {
    const auto a = test::random_image(9, 7, 12);
    const auto b = test::random_image(9, 7, 13);
    std::vector<double> neg, aff, aff_b;
    for (double v : a.values()) {
      neg.push_back(-v);
      aff.push_back(3.5 * v - 2.0);
    }
    for (double v : b.values()) aff_b.push_back(0.25 * v + 100.0);
    CHECK(std::abs(ncc(a, a) - 1.0) < 1e-12);
    CHECK(std::abs(ncc(a, a.with_values(neg)) + 1.0) < 1e-12);
    CHECK(std::abs(ncc(a, a.with_values(aff)) - 1.0) < 1e-12);
    CHECK(std::abs(ncc(a, b) - ncc(b, a)) < 1e-12);
    CHECK(std::abs(ncc(a.with_values(aff), b.with_values(aff_b)) - ncc(a, b)) < 1e-12);
    CHECK(std::abs(ncc(a, b) - ncc_oracle(a.values(), b.values())) < 1e-12);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const double r = ncc(test::random_image(4, 4, 100 + s), test::random_image(4, 4, 200 + s));
      CHECK(r >= -1.0);
      CHECK(r <= 1.0);
    }
    const auto flat = Image2D::filled({9, 7}, {1, 1}, ImageUnit::kDimensionless, 2.0);
    CHECK_THROWS_AS(ncc(a, flat), UndefinedMetricError);
    CHECK_THROWS_AS(ncc(a, test::random_image(7, 9, 1)), DegenerateInputError);
  }

  TEST_CASE("gc_similarity") {
    const auto a = random_smooth_image(16, 16, 3);
    std::vector<double> neg;
    for (double v : a.values()) neg.push_back(-v);
    CHECK(std::abs(gc_similarity(a, a) - 2.0) < 1e-12);
    CHECK(std::abs(gc_similarity(a, a.with_values(neg)) + 2.0) < 1e-12);
    const auto ref = blob(15.5);
    const double one = gc_similarity(ref, blob(16.5));
    const double five = gc_similarity(ref, blob(20.5));
    CHECK(one < 2.0);
    CHECK(one > five);
    const auto ramp = from_fn(6, 6, [](double x, double y) { return x + 2 * y; });
    CHECK_THROWS_AS(gc_similarity(ramp, random_smooth_image(6, 6, 1)), UndefinedMetricError);
  }

  TEST_CASE("register at the true pose stays put; zero volume fails") {
    PhantomSpec spec;
    const auto c = generate_phantom(spec);
    const auto geometry = pinhole64();
    const RigidTransform6 truth{};
    const auto xray = render_drr(c.density, geometry, truth);
    const auto result = register_2d3d(xray, c.density, nullptr, geometry, truth, default_registration_config());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(result.pose.to_array()[i]) <= 0.1);
    for (int i = 3; i < 6; ++i) CHECK(std::abs(result.pose.to_array()[i]) <= 0.1);
    CHECK(result.gc >= result.gc_init);
    CHECK(std::abs(result.gc_init - 2.0) < 1e-12);

    const auto zero = Volume3D::filled(c.density.grid(), VolumeUnit::kDensityMgCm3, 0.0);
    CHECK_THROWS_AS(register_2d3d(xray, zero, nullptr, geometry, truth, default_registration_config()),
                    RegistrationError);
    const auto wrong = test::random_image(8, 8, 1);
    CHECK_THROWS_AS(register_2d3d(wrong, c.density, nullptr, geometry, truth, default_registration_config()),
                    InvariantError);
  }

  TEST_CASE("perturbed start is recovered below one voxel and GC never drops") {
    const auto c = generate_phantom(PhantomSpec{});
    const auto geometry = pinhole64();
    const RigidTransform6 truth{1.0, -2.0, 0.5, 1.0, 0.0, -1.5};
    const auto xray = render_drr(c.density, geometry, truth);
    const RigidTransform6 init{5.0, -6.0, -3.0, 4.0, -4.0, 3.0};
    auto cfg = default_registration_config();
    cfg.seed = 9;
    const auto r = register_2d3d(xray, c.density, nullptr, geometry, init, cfg);
    CHECK(r.gc >= r.gc_init);
    CHECK(mean_corner_tre(c.density.grid(), r.pose, truth) < c.spec.spacing_mm);
  }
}
