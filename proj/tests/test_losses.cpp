// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "bmdx/error.hpp"
#include "bmdx/losses.hpp"
#include "bmdx/registration.hpp"
#include "support.hpp"

using namespace bmdx;

namespace {

FeatureStack random_stack(std::uint64_t seed) {
  FeatureStack s;
  s.layers = {test::random_values(5, seed), test::random_values(3, seed + 1), test::random_values(8, seed + 2)};
  return s;
}

Image2D scaled(const Image2D& im, double a, double b) {
  std::vector<double> v(im.values().begin(), im.values().end());
  for (double& x : v) x = a * x + b;
  return im.with_values(v);
}

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("gan_loss") {
    const std::vector<double> ones(4, 1.0), zeros(4, 0.0), half(3, 0.5);
    CHECK(std::abs(gan_loss(ones, zeros)) < 1e-6);
    CHECK(std::abs(gan_loss(half, half) - 2 * std::log(0.5)) < 1e-12);
    CHECK(std::isfinite(gan_loss(zeros, ones)));
    const auto r = test::random_values(7, 1, 0.01, 0.99);
    const auto f = test::random_values(5, 2, 0.01, 0.99);
    double a = 0, b = 0;
    for (double v : r) a += std::log(v);
    for (double v : f) b += std::log(1 - v);
    CHECK(std::abs(gan_loss(r, f) - (a / 7 + b / 5)) < 1e-12);
    CHECK_THROWS_AS(gan_loss(std::vector<double>{}, f), DegenerateInputError);
  }

  TEST_CASE("fm_loss") {
    const auto s = random_stack(3);
    CHECK(fm_loss(s, s) == 0.0);
    FeatureStack one{{std::vector<double>(6, 1.0)}}, zero{{std::vector<double>(6, 0.0)}};
    CHECK(fm_loss(one, zero) == 1.0);
    const auto t = random_stack(9);
    double oracle = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      double sum = 0;
      for (std::size_t k = 0; k < s.layers[i].size(); ++k) sum += std::abs(s.layers[i][k] - t.layers[i][k]);
      oracle += sum / s.layers[i].size();
    }
    CHECK(std::abs(fm_loss(s, t) - oracle) < 1e-12);
    CHECK_THROWS_AS(fm_loss(s, one), DegenerateInputError);
  }

  TEST_CASE("l1_loss") {
    const auto t = test::random_image(4, 4, 5);
    const auto same = l1_loss(t, t);
    CHECK(same.value == 0.0);
    for (double g : same.grad.values()) CHECK(g == 0.0);
    const auto ones = Image2D::filled({4, 4}, {1, 1}, ImageUnit::kDimensionless, 1.0);
    const auto zeros = Image2D::filled({4, 4}, {1, 1}, ImageUnit::kDimensionless, 0.0);
    const auto r = l1_loss(ones, zeros);
    CHECK(r.value == 1.0);
    for (double g : r.grad.values()) CHECK(g == -1.0 / 16);
    CHECK_THROWS_AS(l1_loss(t, test::random_image(3, 4, 1)), DegenerateInputError);
  }

  TEST_CASE("gc_loss examples and affine invariance") {
    const auto t = random_smooth_image(16, 16, 4);
    CHECK(std::abs(gc_loss(t, t).value + 2.0) < 1e-12);
    CHECK(std::abs(gc_loss(t, scaled(t, -1, 0)).value - 2.0) < 1e-12);
    const auto o = random_smooth_image(16, 16, 5);
    const auto base = gc_loss(t, o);
    CHECK(std::abs(base.value + gc_similarity(t, o)) < 1e-12);
    for (const auto& [a, b] : {std::pair{1.0, 3.0}, std::pair{4.5, 0.0}, std::pair{0.2, -7.0}}) {
      const auto other = gc_loss(t, scaled(o, a, b));
      CHECK(std::abs(other.value - base.value) < 1e-9);
    }
    CHECK_THROWS_AS(gc_loss(t, Image2D::filled({16, 16}, {1, 1}, ImageUnit::kDimensionless, 1.0)),
                    UndefinedMetricError);
  }

  TEST_CASE("gradient check against central differences") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = check_loss_gradients(GradientCheckConfig{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(results.size() == 2);
    for (const auto& r : results) {
      INFO(r.kernel << " max rel error " << r.max_rel_error);
      CHECK(r.trials == 100);
      CHECK(r.passed);
      CHECK(r.max_rel_error < 1e-4);
    }
    CHECK(secs < 30.0);
  }

  TEST_CASE("dec_loss") {
    const auto t = random_smooth_image(12, 12, 6);
    const std::vector<FeatureStack> same{random_stack(1), random_stack(2), random_stack(3)};
    CHECK(std::abs(dec_loss(t, t, same, same, LossWeights{}) + 2.0) < 1e-12);
    CHECK(dec_loss(t, random_smooth_image(12, 12, 7), same, same, LossWeights{0, 0, 0}) == 0.0);

    const auto o = random_smooth_image(12, 12, 8);
    const std::vector<FeatureStack> fake{random_stack(4), random_stack(5), random_stack(6)};
    const LossWeights w{3.0, 0.7, 2.5};
    const double fm = fm_loss(same[0], fake[0]) + fm_loss(same[1], fake[1]) + fm_loss(same[2], fake[2]);
    const double expected = 3.0 * l1_loss(t, o).value + 0.7 * gc_loss(t, o).value + 2.5 * fm;
    const double got = dec_loss(t, o, same, fake, w);
    CHECK(std::abs(got - expected) < 1e-12);

    // Linear in each weight.
    const double l1_part = dec_loss(t, o, same, fake, {1, 0, 0});
    for (double k : {0.5, 2.0, 10.0}) {
      CHECK(std::abs(dec_loss(t, o, same, fake, {3.0 + k, 0.7, 2.5}) - got - k * l1_part) < 1e-9);
    }
    CHECK(std::abs(dec_loss(t, o, same, fake, {3.0, 1.7, 2.5}) - got - dec_loss(t, o, same, fake, {0, 1, 0})) <
          1e-9);
    CHECK(std::abs(dec_loss(t, o, same, fake, {3.0, 0.7, 4.5}) - got - 2 * dec_loss(t, o, same, fake, {0, 0, 1})) <
          1e-9);

    CHECK_THROWS_AS(dec_loss(t, o, std::vector<FeatureStack>{same[0]}, std::vector<FeatureStack>{fake[0]}, w),
                    DegenerateInputError);
    CHECK_THROWS_AS(LossWeights({-1, 1, 1}).validate(), InvariantError);
    CHECK(LossWeights{}.l1 == 100.0);
    CHECK(LossWeights{}.gc == 1.0);
    CHECK(LossWeights{}.fm == 10.0);
  }

  TEST_CASE("sample_weights") {
    const std::vector<double> y{1, 2, 3};
    const auto w = sample_weights(y);
    CHECK(w.mean == 2.0);
    CHECK(w.weights == std::vector<double>{0.5, 1.5, 0.5});
    CHECK_FALSE(w.degenerate);

    const std::vector<double> y2{0.0, 1.0, 10.0, 4.0};  // mean 3.75; d = 3.75, 2.75, 6.25, 0.25
    const auto w2 = sample_weights(y2);
    CHECK(std::abs(w2.weights[3] - 1.5) < 1e-12);
    CHECK(std::abs(w2.weights[2] - 0.5) < 1e-12);
    CHECK(w2.d_min == 0.25);
    CHECK(w2.d_max == 6.25);
    // y = 6.75 sits at d = 3.25, the midpoint of [0.25, 6.25].
    const std::vector<double> y3{0.0, 1.0, 10.0, 4.0, 6.75};
    const auto w3 = sample_weights(y3);
    const double mid = 0.5 * (w3.d_min + w3.d_max);
    for (std::size_t i = 0; i < y3.size(); ++i) {
      if (std::abs(std::abs(y3[i] - w3.mean) - mid) < 1e-15) CHECK(std::abs(w3.weights[i] - 1.0) < 1e-12);
    }

    const auto flat = sample_weights(std::vector<double>{1.0, 3.0});
    CHECK(flat.degenerate);
    CHECK(flat.weights == std::vector<double>{1.0, 1.0});
    CHECK_THROWS_AS(sample_weights(std::vector<double>{1.0}), DegenerateInputError);

    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto ys = test::random_values(15, 40 + s, 0.5, 1.5);
      const auto ws = sample_weights(ys);
      int top = 0;
      for (double v : ws.weights) {
        CHECK(v >= 0.5);
        CHECK(v <= 1.5);
        top += v == 1.5 ? 1 : 0;
      }
      CHECK(top == 1);
    }
  }

  TEST_CASE("weighted_regression_loss") {
    const auto y = test::random_values(6, 2);
    CHECK(weighted_regression_loss(y, y, std::vector<double>(6, 1.0)) == 0.0);
    CHECK(weighted_regression_loss(std::vector<double>{1.0}, std::vector<double>{1.5}, std::vector<double>{2.0}) ==
          1.0);
    const auto p = test::random_values(6, 3);
    const auto w = test::random_values(6, 4, 0.5, 1.5);
    double s = 0;
    for (std::size_t i = 0; i < 6; ++i) s += w[i] * std::abs(y[i] - p[i]);
    CHECK(std::abs(weighted_regression_loss(y, p, w) - s / 6) < 1e-12);
    CHECK_THROWS_AS(weighted_regression_loss(y, p, std::vector<double>(5, 1.0)), DegenerateInputError);
  }
}
