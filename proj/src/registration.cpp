// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/registration.hpp"

#include <cmath>
#include <limits>

#include "bmdx/error.hpp"

namespace bmdx {

ImageGradient gradient_image(const Image2D& image) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  if (w < 2 || h < 2) throw DegenerateInputError("gradient_image needs an image of at least 2x2");
  std::vector<double> gx(w * h);
  std::vector<double> gy(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (x == 0) {
        gx[i] = image.at(1, y) - image.at(0, y);
      } else if (x == w - 1) {
        gx[i] = image.at(w - 1, y) - image.at(w - 2, y);
      } else {
        gx[i] = 0.5 * (image.at(x + 1, y) - image.at(x - 1, y));
      }
      if (y == 0) {
        gy[i] = image.at(x, 1) - image.at(x, 0);
      } else if (y == h - 1) {
        gy[i] = image.at(x, h - 1) - image.at(x, h - 2);
      } else {
        gy[i] = 0.5 * (image.at(x, y + 1) - image.at(x, y - 1));
      }
    }
  }
  return {image.with_values(std::move(gx)), image.with_values(std::move(gy))};
}

double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw DegenerateInputError("ncc inputs must be non-empty and equal in size");
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
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetricError("ncc undefined: an input has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ncc(const Image2D& a, const Image2D& b) {
  if (a.dims() != b.dims()) throw DegenerateInputError("ncc images differ in dims");
  return ncc(a.values(), b.values());
}

double gc_similarity(const Image2D& a, const Image2D& b) {
  if (a.dims() != b.dims()) throw DegenerateInputError("gc_similarity images differ in dims");
  const auto ga = gradient_image(a);
  const auto gb = gradient_image(b);
  return ncc(ga.gx, gb.gx) + ncc(ga.gy, gb.gy);
}

CmaConfig default_registration_config() {
  CmaConfig c;
  c.sigma0 = {2.0, 2.0, 2.0, 2.0, 2.0, 2.0};
  c.population = 24;
  c.max_evaluations = 3000;
  c.tol_sigma = 1e-3;
  c.tol_fun = 1e-10;
  c.seed = 1;
  return c;
}

RegistrationResult register_2d3d(const Image2D& xray, const Volume3D& volume, const Mask3D* mask,
                                 const ProjectionGeometry& geometry, const RigidTransform6& init,
                                 const CmaConfig& config) {
  geometry.validate();
  if (xray.dims() != geometry.detector_dims) {
    throw InvariantError("X-ray dims do not match the detector dims");
  }
  const auto start = init.canonical();
  const ImageGradient xray_grad = [&] {
    try {
      return gradient_image(xray);
    } catch (const DegenerateInputError& e) {
      throw RegistrationError(std::string("X-ray unusable: ") + e.what());
    }
  }();

  const auto score = [&](const RigidTransform6& pose) {
    const auto drr_grad = gradient_image(render_drr(volume, mask, geometry, pose));
    return ncc(xray_grad.gx, drr_grad.gx) + ncc(xray_grad.gy, drr_grad.gy);
  };

  RegistrationResult out;
  try {
    out.gc_init = score(start);
  } catch (const UndefinedMetricError&) {
    throw RegistrationError("DRR at the initial pose has no gradient structure (empty volume or pose off-target)");
  }

  const Objective objective = [&](std::span<const double> p) {
    try {
      return -score(RigidTransform6::from_array(p));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const auto x0 = start.to_array();
  const auto cma = cma_es_minimize(objective, x0, config);
  if (!std::isfinite(cma.f_best)) throw RegistrationError("no pose produced a finite similarity");
  out.pose = RigidTransform6::from_array(cma.x_best).canonical();
  out.gc = -cma.f_best;
  out.evaluations = cma.evaluations;
  out.stop = cma.stop;
  return out;
}

}  // namespace bmdx
