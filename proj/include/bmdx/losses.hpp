// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bmdx/imaging.hpp"

namespace bmdx {

struct LossWeights {
  double l1 = 100.0;
  double gc = 1.0;
  double fm = 10.0;

  void validate() const;
};

/// T layers of discriminator features; layer i holds N_i scalars.
struct FeatureStack {
  std::vector<std::vector<double>> layers;

  void validate() const;
};

struct LossWithGradient {
  double value = 0.0;
  Image2D grad;  // d value / d output
};

inline constexpr double kProbabilityEpsilon = 1e-7;

/// mean(log d_real) + mean(log(1 - d_fake)), probabilities clamped to [eps, 1 - eps].
double gan_loss(std::span<const double> d_real, std::span<const double> d_fake);

/// sum_i mean |real_i - fake_i| over the layers.
double fm_loss(const FeatureStack& real, const FeatureStack& fake);

/// Mean absolute difference; gradient -sign(t - o) / N with sign(0) = 0.
LossWithGradient l1_loss(const Image2D& target, const Image2D& output);

/// -GC(target, output) and its gradient with respect to output.
LossWithGradient gc_loss(const Image2D& target, const Image2D& output);

/// l1 * L1 + gc * (-GC) + fm * sum_k FM_k over the three discriminator scales.
double dec_loss(const Image2D& target, const Image2D& output, std::span<const FeatureStack> real_feats,
                std::span<const FeatureStack> fake_feats, const LossWeights& weights);

struct SampleWeighting {
  std::vector<double> weights;
  double mean = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  /// Set when every |y - mean| is equal and all weights fell back to 1.
  bool degenerate = false;
};

/// d_i = |y_i - mean y|, w_i = 1.5 - (d_i - d_min) / (d_max - d_min).
SampleWeighting sample_weights(std::span<const double> y_all);

/// mean_i w_i |y_true_i - y_pred_i|
double weighted_regression_loss(std::span<const double> y_true, std::span<const double> y_pred,
                                std::span<const double> w);

// Finite-difference verification of the analytic gradients.

struct GradientCheckConfig {
  std::size_t trials = 100;
  std::size_t width = 16;
  std::size_t height = 16;
  double step = 1e-4;
  double tolerance = 1e-4;
  /// l1: pixels with |t - o| below this are skipped (kink of |.|).
  double l1_exclusion = 1e-3;
  std::uint64_t seed = 1;
};

struct GradientCheckResult {
  std::string kernel;
  std::size_t trials = 0;
  /// Worst over trials of max_k |analytic_k - fd_k| / max_k |fd_k|.
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Random smooth image: a few Gaussian bumps plus a gentle ramp, values O(1).
Image2D random_smooth_image(std::size_t width, std::size_t height, std::uint64_t seed);

std::vector<GradientCheckResult> check_loss_gradients(const GradientCheckConfig& config);

}  // namespace bmdx
