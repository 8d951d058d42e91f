// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bmdx/error.hpp"
#include "bmdx/registration.hpp"
#include "bmdx/seeding.hpp"

namespace bmdx {

void LossWeights::validate() const {
  for (double w : {l1, gc, fm}) {
    if (!std::isfinite(w) || w < 0.0) throw InvariantError("loss weights must be finite and >= 0");
  }
}

void FeatureStack::validate() const {
  if (layers.empty()) throw InvariantError("feature stack needs at least one layer");
  for (const auto& layer : layers) {
    if (layer.empty()) throw InvariantError("feature layers must be non-empty");
  }
}

namespace {

double clamp_probability(double p) {
  if (std::isnan(p)) throw InvariantError("probability is NaN");
  return std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

void require_same_dims(const Image2D& a, const Image2D& b) {
  if (a.dims() != b.dims()) throw DegenerateInputError("target and output differ in dims");
}

struct ChannelNcc {
  double value = 0.0;
  std::vector<double> grad;  // d ncc / d b
};

// NCC of a against b together with its derivative in b.
ChannelNcc ncc_with_grad(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetricError("gradient channel has zero variance");
  const double norm = std::sqrt(saa * sbb);
  ChannelNcc out;
  out.value = sab / norm;
  out.grad.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.grad[i] = (a[i] - ma) / norm - out.value * (b[i] - mb) / sbb;
  }
  return out;
}

// Adjoint of the gradient stencil: accumulates G^T g into out.
void add_stencil_adjoint_x(std::span<const double> g, std::size_t w, std::size_t h, std::vector<double>& out) {
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t row = y * w;
    for (std::size_t x = 0; x < w; ++x) {
      const double v = g[row + x];
      if (x == 0) {
        out[row + 1] += v;
        out[row] -= v;
      } else if (x == w - 1) {
        out[row + w - 1] += v;
        out[row + w - 2] -= v;
      } else {
        out[row + x + 1] += 0.5 * v;
        out[row + x - 1] -= 0.5 * v;
      }
    }
  }
}

void add_stencil_adjoint_y(std::span<const double> g, std::size_t w, std::size_t h, std::vector<double>& out) {
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = g[y * w + x];
      if (y == 0) {
        out[w + x] += v;
        out[x] -= v;
      } else if (y == h - 1) {
        out[(h - 1) * w + x] += v;
        out[(h - 2) * w + x] -= v;
      } else {
        out[(y + 1) * w + x] += 0.5 * v;
        out[(y - 1) * w + x] -= 0.5 * v;
      }
    }
  }
}

}  // namespace

double gan_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw DegenerateInputError("gan_loss needs non-empty inputs");
  double real = 0.0;
  for (double p : d_real) real += std::log(clamp_probability(p));
  double fake = 0.0;
  for (double p : d_fake) fake += std::log(1.0 - clamp_probability(p));
  return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

double fm_loss(const FeatureStack& real, const FeatureStack& fake) {
  real.validate();
  fake.validate();
  if (real.layers.size() != fake.layers.size()) throw DegenerateInputError("feature stacks differ in layer count");
  double total = 0.0;
  for (std::size_t i = 0; i < real.layers.size(); ++i) {
    const auto& r = real.layers[i];
    const auto& f = fake.layers[i];
    if (r.size() != f.size()) throw DegenerateInputError("feature layer " + std::to_string(i) + " differs in size");
    double sum = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) sum += std::abs(r[k] - f[k]);
    total += sum / static_cast<double>(r.size());
  }
  return total;
}

LossWithGradient l1_loss(const Image2D& target, const Image2D& output) {
  require_same_dims(target, output);
  const auto t = target.values();
  const auto o = output.values();
  const auto n = static_cast<double>(t.size());
  double sum = 0.0;
  std::vector<double> grad(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = t[i] - o[i];
    sum += std::abs(d);
    grad[i] = d > 0.0 ? -1.0 / n : (d < 0.0 ? 1.0 / n : 0.0);
  }
  return {sum / n, output.with_values(std::move(grad))};
}

LossWithGradient gc_loss(const Image2D& target, const Image2D& output) {
  require_same_dims(target, output);
  const auto gt = gradient_image(target);
  const auto go = gradient_image(output);
  const auto cx = ncc_with_grad(gt.gx.values(), go.gx.values());
  const auto cy = ncc_with_grad(gt.gy.values(), go.gy.values());
  const std::size_t w = output.width();
  const std::size_t h = output.height();
  std::vector<double> grad(w * h, 0.0);
  add_stencil_adjoint_x(cx.grad, w, h, grad);
  add_stencil_adjoint_y(cy.grad, w, h, grad);
  for (double& g : grad) g = -g;
  return {-(cx.value + cy.value), output.with_values(std::move(grad))};
}

double dec_loss(const Image2D& target, const Image2D& output, std::span<const FeatureStack> real_feats,
                std::span<const FeatureStack> fake_feats, const LossWeights& weights) {
  weights.validate();
  if (real_feats.size() != 3 || fake_feats.size() != 3) {
    throw DegenerateInputError("dec_loss expects feature stacks for exactly three discriminator scales");
  }
  double fm = 0.0;
  for (std::size_t k = 0; k < 3; ++k) fm += fm_loss(real_feats[k], fake_feats[k]);
  return weights.l1 * l1_loss(target, output).value + weights.gc * gc_loss(target, output).value + weights.fm * fm;
}

SampleWeighting sample_weights(std::span<const double> y_all) {
  if (y_all.size() < 2) throw DegenerateInputError("sample weighting needs at least two samples");
  for (double y : y_all) {
    if (!std::isfinite(y)) throw InvariantError("BMD values must be finite");
  }
  SampleWeighting out;
  for (double y : y_all) out.mean += y;
  out.mean /= static_cast<double>(y_all.size());
  std::vector<double> d(y_all.size());
  for (std::size_t i = 0; i < y_all.size(); ++i) d[i] = std::abs(y_all[i] - out.mean);
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  out.d_min = *lo;
  out.d_max = *hi;
  out.weights.resize(d.size());
  if (out.d_max == out.d_min) {
    out.degenerate = true;
    std::fill(out.weights.begin(), out.weights.end(), 1.0);
    return out;
  }
  const double range = out.d_max - out.d_min;
  for (std::size_t i = 0; i < d.size(); ++i) out.weights[i] = 1.5 - (d[i] - out.d_min) / range;
  return out;
}

double weighted_regression_loss(std::span<const double> y_true, std::span<const double> y_pred,
                                std::span<const double> w) {
  if (y_true.size() != y_pred.size() || y_true.size() != w.size()) {
    throw DegenerateInputError("y_true, y_pred and w differ in length");
  }
  if (y_true.empty()) throw DegenerateInputError("weighted regression loss needs samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += w[i] * std::abs(y_true[i] - y_pred[i]);
  return sum / static_cast<double>(y_true.size());
}

Image2D random_smooth_image(std::size_t width, std::size_t height, std::uint64_t seed) {
  if (width < 2 || height < 2) throw DegenerateInputError("smooth image needs at least 2x2 pixels");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  struct Bump {
    double cx, cy, s, a;
  };
  std::vector<Bump> bumps(4);
  for (auto& b : bumps) {
    b = {unit(rng) * w, unit(rng) * h, 1.5 + 3.0 * unit(rng), unit(rng) * 2.0 - 1.0};
  }
  const double gx = unit(rng) - 0.5;
  const double gy = unit(rng) - 0.5;
  std::vector<double> v(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double s = gx * static_cast<double>(x) / w + gy * static_cast<double>(y) / h;
      for (const auto& b : bumps) {
        const double dx = static_cast<double>(x) - b.cx;
        const double dy = static_cast<double>(y) - b.cy;
        s += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
      }
      v[y * width + x] = s;
    }
  }
  return Image2D({width, height}, {1.0, 1.0}, ImageUnit::kDimensionless, std::move(v));
}

namespace {

template <typename Loss>
double fd_relative_error(const Loss& loss, const Image2D& target, const Image2D& output, double h,
                         double l1_exclusion) {
  const auto analytic = loss(target, output).grad;
  std::vector<double> probe(output.values().begin(), output.values().end());
  double max_diff = 0.0;
  double max_fd = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (l1_exclusion > 0.0 && std::abs(target.values()[k] - probe[k]) < l1_exclusion) continue;
    const double saved = probe[k];
    probe[k] = saved + h;
    const double up = loss(target, output.with_values(probe)).value;
    probe[k] = saved - h;
    const double down = loss(target, output.with_values(probe)).value;
    probe[k] = saved;
    const double fd = (up - down) / (2.0 * h);
    max_diff = std::max(max_diff, std::abs(analytic.values()[k] - fd));
    max_fd = std::max(max_fd, std::abs(fd));
  }
  if (max_fd == 0.0) return max_diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return max_diff / max_fd;
}

}  // namespace

std::vector<GradientCheckResult> check_loss_gradients(const GradientCheckConfig& config) {
  if (config.trials < 1) throw InvariantError("gradient check needs at least one trial");
  if (!(config.step > 0.0) || !(config.tolerance > 0.0)) throw InvariantError("step and tolerance must be > 0");
  GradientCheckResult l1{"l1_loss", config.trials, 0.0, config.tolerance, false};
  GradientCheckResult gc{"gc_loss", config.trials, 0.0, config.tolerance, false};
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const auto target = random_smooth_image(config.width, config.height, sub_seed(config.seed, "fd-target", trial));
    const auto output = random_smooth_image(config.width, config.height, sub_seed(config.seed, "fd-output", trial));
    l1.max_rel_error = std::max(
        l1.max_rel_error, fd_relative_error(l1_loss, target, output, config.step, config.l1_exclusion));
    gc.max_rel_error = std::max(gc.max_rel_error, fd_relative_error(gc_loss, target, output, config.step, 0.0));
  }
  l1.passed = l1.max_rel_error <= config.tolerance;
  gc.passed = gc.max_rel_error <= config.tolerance;
  return {l1, gc};
}

}  // namespace bmdx
