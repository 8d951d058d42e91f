// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "bmdx/error.hpp"
#include "bmdx/seeding.hpp"

namespace bmdx {

namespace {

bool inside(const Sphere& s, const Vec3& p) { return s.radius > 0.0 && (p - s.center).squaredNorm() <= s.radius * s.radius; }

bool inside(const Cylinder& c, const Vec3& p) {
  if (c.radius <= 0.0) return false;
  const Vec3 axis = c.b - c.a;
  const double len2 = axis.squaredNorm();
  if (len2 == 0.0) return false;
  const Vec3 q = p - c.a;
  const double along = q.dot(axis);
  if (along < 0.0 || along > len2) return false;
  return (q - (along / len2) * axis).squaredNorm() <= c.radius * c.radius;
}

bool inside(const Ellipsoid& e, const Vec3& p) {
  const Vec3 q = (p - e.center).cwiseQuotient(e.radii);
  return q.squaredNorm() <= 1.0;
}

Sphere shrink(const Sphere& s, double t) { return {s.center, std::max(0.0, s.radius - t)}; }

Cylinder shrink(const Cylinder& c, double t) {
  const Vec3 axis = c.b - c.a;
  const double len = axis.norm();
  if (len <= 2.0 * t || c.radius <= t) return {c.a, c.a, 0.0};
  const Vec3 u = axis / len;
  return {c.a + t * u, c.b - t * u, c.radius - t};
}

struct Bone {
  Sphere head;
  Cylinder neck;
  Cylinder shaft;
  Sphere head_core;
  Cylinder neck_core;
  Cylinder shaft_core;

  explicit Bone(const FemurShape& f)
      : head(f.head),
        neck(f.neck),
        shaft(f.shaft),
        head_core(shrink(f.head, f.shell_thickness)),
        neck_core(shrink(f.neck, f.shell_thickness)),
        shaft_core(shrink(f.shaft, f.shell_thickness)) {}

  bool in_bone(const Vec3& p) const { return inside(head, p) || inside(neck, p) || inside(shaft, p); }
  bool in_core(const Vec3& p) const { return inside(head_core, p) || inside(neck_core, p) || inside(shaft_core, p); }
};

// Material label of a point: 0 air, 1 soft tissue, 2 shell, 3 core, 4 + k rod k.
class Labeller {
 public:
  explicit Labeller(const PhantomSpec& spec) : spec_(spec), bone_(spec.femur) {}

  int label(const Vec3& p) const {
    if (bone_.in_bone(p)) return bone_.in_core(p) ? 3 : 2;
    for (std::size_t k = 0; k < spec_.rods.size(); ++k) {
      const auto& r = spec_.rods[k];
      const double dx = p.x() - r.x;
      const double dy = p.y() - r.y;
      if (dx * dx + dy * dy <= r.radius * r.radius) return 4 + static_cast<int>(k);
    }
    return inside(spec_.body, p) ? 1 : 0;
  }

  double density(int label) const {
    switch (label) {
      case 0:
        return 0.0;
      case 1:
        return spec_.soft_density;
      case 2:
        return spec_.shell_density;
      case 3:
        return spec_.core_density;
      default:
        return spec_.rods[static_cast<std::size_t>(label - 4)].density;
    }
  }

 private:
  const PhantomSpec& spec_;
  Bone bone_;
};

struct IndexBox {
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};  // inclusive
  bool empty = true;

  bool contains(std::size_t i, std::size_t j, std::size_t k) const {
    return !empty && i >= lo[0] && i <= hi[0] && j >= lo[1] && j <= hi[1] && k >= lo[2] && k <= hi[2];
  }
};

// Voxels whose centre lies in [min, max].
IndexBox pf_index_box(const PhantomSpec& spec) {
  const Grid3 g = spec.grid();
  const std::array<std::size_t, 3> n{g.dims().nx, g.dims().ny, g.dims().nz};
  IndexBox box;
  box.empty = false;
  for (int a = 0; a < 3; ++a) {
    const double o = g.origin()[a];
    const double s = spec.spacing_mm;
    const double first = std::ceil((spec.pf_box_min[a] - o) / s);
    const double last = std::floor((spec.pf_box_max[a] - o) / s);
    const double lo = std::max(first, 0.0);
    const double hi = std::min(last, static_cast<double>(n[a]) - 1.0);
    if (lo > hi) {
      box.empty = true;
      return box;
    }
    box.lo[a] = static_cast<std::size_t>(lo);
    box.hi[a] = static_cast<std::size_t>(hi);
  }
  return box;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw InvariantError("phantom spec: " + what);
}

bool box_inside(const Vec3& lo, const Vec3& hi, const Grid3& g) {
  return (lo.array() >= g.box_min().array()).all() && (hi.array() <= g.box_max().array()).all();
}

void check_inside(const Sphere& s, const Grid3& g, const std::string& name) {
  if (s.radius <= 0.0) return;
  const Vec3 r = Vec3::Constant(s.radius);
  check(box_inside(s.center - r, s.center + r, g), name + " leaves the volume");
}

void check_inside(const Cylinder& c, const Grid3& g, const std::string& name) {
  if (c.radius <= 0.0) return;
  const Vec3 r = Vec3::Constant(c.radius);
  check(box_inside(c.a.cwiseMin(c.b) - r, c.a.cwiseMax(c.b) + r, g), name + " leaves the volume");
}

double density_nonneg(double v) { return std::isfinite(v) && v >= 0.0 ? v : -1.0; }

}  // namespace

Grid3 PhantomSpec::grid() const {
  const Vec3 spacing = Vec3::Constant(spacing_mm);
  const Vec3 extent(static_cast<double>(dims.nx) - 1.0, static_cast<double>(dims.ny) - 1.0,
                    static_cast<double>(dims.nz) - 1.0);
  return Grid3(dims, spacing, -0.5 * extent.cwiseProduct(spacing));
}

void PhantomSpec::validate() const {
  check(dims.nx >= 2 && dims.ny >= 2 && dims.nz >= 2, "dims must be >= 2");
  check(spacing_mm > 0.0 && std::isfinite(spacing_mm), "spacing must be > 0");
  check(supersample >= 1, "supersample must be >= 1");
  check(ref_slope > 0.0 && std::isfinite(ref_slope), "ref_slope must be > 0");
  check(std::isfinite(ref_intercept), "ref_intercept must be finite");
  check(noise_sigma_hu >= 0.0 && std::isfinite(noise_sigma_hu), "noise sigma must be >= 0");
  for (double d : {soft_density, shell_density, core_density}) check(density_nonneg(d) >= 0.0, "densities must be >= 0");
  check((body.radii.array() > 0.0).all(), "body radii must be > 0");
  check(femur.shell_thickness >= 0.0, "shell thickness must be >= 0");
  check(femur.head.radius >= 0.0 && femur.neck.radius >= 0.0 && femur.shaft.radius >= 0.0, "radii must be >= 0");
  const Grid3 g = grid();
  check(box_inside(body.center - body.radii, body.center + body.radii, g), "body ellipsoid leaves the volume");
  check_inside(femur.head, g, "femoral head");
  check_inside(femur.neck, g, "femoral neck");
  check_inside(femur.shaft, g, "femoral shaft");
  check((pf_box_min.array() < pf_box_max.array()).all(), "PF box min must be below max");
  check(!pf_index_box(*this).empty, "PF box contains no voxel");
  for (std::size_t k = 0; k < rods.size(); ++k) {
    const auto& r = rods[k];
    check(r.radius > 0.0, "rod radius must be > 0");
    check(density_nonneg(r.density) >= 0.0, "rod densities must be >= 0");
    check(r.x - r.radius >= g.box_min().x() && r.x + r.radius <= g.box_max().x() &&
              r.y - r.radius >= g.box_min().y() && r.y + r.radius <= g.box_max().y(),
          "rod " + std::to_string(k) + " leaves the volume");
    for (std::size_t m = 0; m < k; ++m) {
      const double d = std::hypot(r.x - rods[m].x, r.y - rods[m].y);
      check(d > r.radius + rods[m].radius, "rods " + std::to_string(m) + " and " + std::to_string(k) + " overlap");
    }
    for (int s = 0; s < 72; ++s) {
      const double a = 2.0 * std::numbers::pi * s / 72.0;
      const double ex = (r.x + r.radius * std::cos(a) - body.center.x()) / body.radii.x();
      const double ey = (r.y + r.radius * std::sin(a) - body.center.y()) / body.radii.y();
      check(ex * ex + ey * ey > 1.0, "rod " + std::to_string(k) + " touches the body");
    }
  }
}

SyntheticCase generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Grid3 grid = spec.grid();
  const Dims3 d = grid.dims();
  const double s = spec.spacing_mm;
  const Vec3 origin = grid.origin();
  const Labeller labeller(spec);

  // Labels on the voxel-corner lattice, shared between neighbouring voxels.
  const std::size_t cx = d.nx + 1;
  const std::size_t cy = d.ny + 1;
  std::vector<std::int8_t> corner(cx * cy * (d.nz + 1));
  for (std::size_t k = 0; k <= d.nz; ++k) {
    for (std::size_t j = 0; j <= d.ny; ++j) {
      for (std::size_t i = 0; i <= d.nx; ++i) {
        const Vec3 p = origin + s * Vec3(static_cast<double>(i) - 0.5, static_cast<double>(j) - 0.5,
                                         static_cast<double>(k) - 0.5);
        corner[(k * cy + j) * cx + i] = static_cast<std::int8_t>(labeller.label(p));
      }
    }
  }

  const std::size_t n = d.count();
  std::vector<double> density(n);
  std::vector<double> bone_frac(n);
  std::vector<double> bone_mass(n);  // mean bone density x bone fraction
  const std::size_t ss = spec.supersample;
  const double inv_samples = 1.0 / static_cast<double>(ss * ss * ss);
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        const std::size_t v = grid.index(i, j, k);
        const Vec3 c = grid.voxel_center(i, j, k);
        const int centre = labeller.label(c);
        bool uniform = true;
        for (std::size_t m = 0; m < 8 && uniform; ++m) {
          const std::size_t ci = i + (m & 1);
          const std::size_t cj = j + ((m >> 1) & 1);
          const std::size_t ck = k + ((m >> 2) & 1);
          uniform = corner[(ck * cy + cj) * cx + ci] == centre;
        }
        if (uniform) {
          density[v] = labeller.density(centre);
          const bool bone = centre == 2 || centre == 3;
          bone_frac[v] = bone ? 1.0 : 0.0;
          bone_mass[v] = bone ? density[v] : 0.0;
          continue;
        }
        double dsum = 0.0;
        double bcount = 0.0;
        double bsum = 0.0;
        for (std::size_t c3 = 0; c3 < ss; ++c3) {
          for (std::size_t b3 = 0; b3 < ss; ++b3) {
            for (std::size_t a3 = 0; a3 < ss; ++a3) {
              const Vec3 off((static_cast<double>(a3) + 0.5) / static_cast<double>(ss) - 0.5,
                             (static_cast<double>(b3) + 0.5) / static_cast<double>(ss) - 0.5,
                             (static_cast<double>(c3) + 0.5) / static_cast<double>(ss) - 0.5);
              const int l = labeller.label(c + s * off);
              const double rho = labeller.density(l);
              dsum += rho;
              if (l == 2 || l == 3) {
                bcount += 1.0;
                bsum += rho;
              }
            }
          }
        }
        density[v] = dsum * inv_samples;
        bone_frac[v] = bcount * inv_samples;
        bone_mass[v] = bsum * inv_samples;
      }
    }
  }

  SyntheticCase out{.case_id = "",
                    .spec = spec,
                    .hu = Volume3D::filled(grid, VolumeUnit::kHounsfield, 0.0),
                    .density = Volume3D(grid, VolumeUnit::kDensityMgCm3, density),
                    .bone_mask = Mask3D(grid, std::vector<std::uint8_t>(n, 0)),
                    .pf_mask = Mask3D(grid, std::vector<std::uint8_t>(n, 0)),
                    .poses = {},
                    .true_vbmd = 0.0,
                    .pf_fraction = std::vector<double>(n, 0.0),
                    .rods = {}};

  std::vector<double> hu(n);
  std::mt19937_64 rng(sub_seed(spec.seed, "hu-noise"));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t v = 0; v < n; ++v) {
    hu[v] = (density[v] - spec.ref_intercept) / spec.ref_slope;
    if (spec.noise_sigma_hu > 0.0) hu[v] += spec.noise_sigma_hu * noise(rng);
  }
  out.hu = Volume3D(grid, VolumeUnit::kHounsfield, std::move(hu));

  std::vector<std::uint8_t> bone_mask(n);
  for (std::size_t v = 0; v < n; ++v) bone_mask[v] = bone_frac[v] >= 0.5 ? 1 : 0;
  out.bone_mask = Mask3D(grid, std::move(bone_mask));

  const IndexBox box = pf_index_box(spec);
  double pf_mass = 0.0;
  double pf_volume = 0.0;
  std::vector<std::uint8_t> seed_mask(n, 0);
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (!box.contains(i, j, k)) continue;
        const std::size_t v = grid.index(i, j, k);
        out.pf_fraction[v] = bone_frac[v];
        pf_mass += bone_mass[v];
        pf_volume += bone_frac[v];
        seed_mask[v] = bone_frac[v] > 0.0 ? 1 : 0;
      }
    }
  }
  out.true_vbmd = pf_volume > 0.0 ? pf_mass / pf_volume : 0.0;

  std::vector<std::uint8_t> pf(n, 0);
  const auto ni = static_cast<std::ptrdiff_t>(d.nx);
  const auto nj = static_cast<std::ptrdiff_t>(d.ny);
  const auto nk = static_cast<std::ptrdiff_t>(d.nz);
  for (std::ptrdiff_t k = 0; k < nk; ++k) {
    for (std::ptrdiff_t j = 0; j < nj; ++j) {
      for (std::ptrdiff_t i = 0; i < ni; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const auto uk = static_cast<std::size_t>(k);
        if (!box.contains(ui, uj, uk)) continue;
        bool hit = false;
        for (std::ptrdiff_t dk = -1; dk <= 1 && !hit; ++dk) {
          for (std::ptrdiff_t dj = -1; dj <= 1 && !hit; ++dj) {
            for (std::ptrdiff_t di = -1; di <= 1 && !hit; ++di) {
              const auto a = i + di;
              const auto b = j + dj;
              const auto c = k + dk;
              if (a < 0 || b < 0 || c < 0 || a >= ni || b >= nj || c >= nk) continue;
              hit = seed_mask[grid.index(static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                                         static_cast<std::size_t>(c))] != 0;
            }
          }
        }
        pf[grid.index(ui, uj, uk)] = hit ? 1 : 0;
      }
    }
  }
  out.pf_mask = Mask3D(grid, std::move(pf));
  out.rods = measure_rods(out.hu, spec);
  return out;
}

double sphere_only_vbmd(const PhantomSpec& spec) {
  const double r = spec.femur.head.radius;
  const double rc = std::max(0.0, r - spec.femur.shell_thickness);
  const double v_all = r * r * r;
  const double v_core = rc * rc * rc;
  if (v_all == 0.0) throw DegenerateInputError("head sphere has zero volume");
  return (spec.shell_density * (v_all - v_core) + spec.core_density * v_core) / v_all;
}

namespace {

struct Interval {
  double lo;
  double hi;
};

// Roots of |o + t d - c|^2 = r^2 for unit d.
bool sphere_hit(const Sphere& s, const Vec3& o, const Vec3& d, Interval& out) {
  if (s.radius <= 0.0) return false;
  const Vec3 m = o - s.center;
  const double b = m.dot(d);
  const double c = m.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc <= 0.0) return false;
  const double root = std::sqrt(disc);
  out = {-b - root, -b + root};
  return true;
}

bool cylinder_hit(const Cylinder& cyl, const Vec3& o, const Vec3& d, Interval& out) {
  if (cyl.radius <= 0.0) return false;
  const Vec3 axis = cyl.b - cyl.a;
  const double len = axis.norm();
  if (len == 0.0) return false;
  const Vec3 u = axis / len;
  const Vec3 m = o - cyl.a;
  // Axial slab 0 <= (m + t d).u <= len.
  const double mu = m.dot(u);
  const double du = d.dot(u);
  Interval slab{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (du == 0.0) {
    if (mu < 0.0 || mu > len) return false;
  } else {
    const double t0 = -mu / du;
    const double t1 = (len - mu) / du;
    slab = {std::min(t0, t1), std::max(t0, t1)};
  }
  // Radial: |m_perp + t d_perp|^2 <= r^2.
  const Vec3 mp = m - mu * u;
  const Vec3 dp = d - du * u;
  const double a = dp.squaredNorm();
  const double c = mp.squaredNorm() - cyl.radius * cyl.radius;
  Interval radial{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (a == 0.0) {
    if (c > 0.0) return false;
  } else {
    const double b = mp.dot(dp);
    const double disc = b * b - a * c;
    if (disc <= 0.0) return false;
    const double root = std::sqrt(disc);
    radial = {(-b - root) / a, (-b + root) / a};
  }
  out = {std::max(slab.lo, radial.lo), std::min(slab.hi, radial.hi)};
  return out.lo < out.hi;
}

double union_length(std::vector<Interval> parts, Interval clip) {
  for (auto& p : parts) {
    p.lo = std::max(p.lo, clip.lo);
    p.hi = std::min(p.hi, clip.hi);
  }
  std::erase_if(parts, [](const Interval& p) { return !(p.lo < p.hi); });
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
  bool open = false;
  for (const auto& p : parts) {
    if (open && p.lo <= cur_hi) {
      cur_hi = std::max(cur_hi, p.hi);
      continue;
    }
    if (open) total += cur_hi - cur_lo;
    cur_lo = p.lo;
    cur_hi = p.hi;
    open = true;
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

bool slab_clip(const Vec3& lo, const Vec3& hi, const Vec3& o, const Vec3& d, Interval& t) {
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    const double t0 = (lo[a] - o[a]) / d[a];
    const double t1 = (hi[a] - o[a]) / d[a];
    t.lo = std::max(t.lo, std::min(t0, t1));
    t.hi = std::min(t.hi, std::max(t0, t1));
  }
  return t.lo < t.hi;
}

}  // namespace

Image2D analytic_areal_map(const PhantomSpec& spec, const ProjectionGeometry& geometry, const RigidTransform6& pose) {
  spec.validate();
  geometry.validate();
  const auto p = pose.canonical();
  const Grid3 grid = spec.grid();
  const Vec3 centre = grid.centroid();
  const Mat3 rt = p.rotation().transpose();
  const IndexBox box = pf_index_box(spec);
  const Vec3 half = Vec3::Constant(0.5);
  const Vec3 box_lo = grid.origin() + spec.spacing_mm * (Vec3(static_cast<double>(box.lo[0]), static_cast<double>(box.lo[1]),
                                                                static_cast<double>(box.lo[2])) - half);
  const Vec3 box_hi = grid.origin() + spec.spacing_mm * (Vec3(static_cast<double>(box.hi[0]), static_cast<double>(box.hi[1]),
                                                                static_cast<double>(box.hi[2])) + half);
  const auto& f = spec.femur;
  const Sphere head_core = shrink(f.head, f.shell_thickness);
  const Cylinder neck_core = shrink(f.neck, f.shell_thickness);
  const Cylinder shaft_core = shrink(f.shaft, f.shell_thickness);

  const auto collect = [](const Sphere& s, const Cylinder& a, const Cylinder& b, const Vec3& o, const Vec3& d) {
    std::vector<Interval> parts;
    Interval iv{};
    if (sphere_hit(s, o, d, iv)) parts.push_back(iv);
    if (cylinder_hit(a, o, d, iv)) parts.push_back(iv);
    if (cylinder_hit(b, o, d, iv)) parts.push_back(iv);
    return parts;
  };

  const Dims2 dd = geometry.detector_dims;
  std::vector<double> values(dd.count());
  for (std::size_t y = 0; y < dd.h; ++y) {
    for (std::size_t x = 0; x < dd.w; ++x) {
      const Vec3 pix = geometry.pixel_position(x, y);
      Vec3 o;
      Vec3 dir;
      Interval range{};
      if (geometry.mode == ProjectionMode::kParallel) {
        o = pix;
        dir = geometry.ray_dir.normalized();
        range = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      } else {
        o = geometry.source;
        const Vec3 span = pix - geometry.source;
        dir = span.normalized();
        range = {0.0, span.norm()};
      }
      const Vec3 ov = p.apply_inverse(o, centre);
      const Vec3 dv = rt * dir;
      if (!slab_clip(box_lo, box_hi, ov, dv, range)) {
        values[y * dd.w + x] = 0.0;
        continue;
      }
      const double bone = union_length(collect(f.head, f.neck, f.shaft, ov, dv), range);
      const double core = union_length(collect(head_core, neck_core, shaft_core, ov, dv), range);
      values[y * dd.w + x] = 1e-4 * (spec.shell_density * (bone - core) + spec.core_density * core);
    }
  }
  return Image2D(dd, geometry.detector_spacing, ImageUnit::kArealGCm2, std::move(values));
}

std::vector<RodMeasurement> measure_rods(const Volume3D& hu, const PhantomSpec& spec) {
  const Grid3& g = hu.grid();
  const Dims3 d = g.dims();
  const double hs = 0.5 * spec.spacing_mm;
  std::vector<RodMeasurement> out;
  for (std::size_t r = 0; r < spec.rods.size(); ++r) {
    const auto& rod = spec.rods[r];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        const Vec3 c = g.voxel_center(i, j, 0);
        const double fx = std::abs(c.x() - rod.x) + hs;
        const double fy = std::abs(c.y() - rod.y) + hs;
        if (fx * fx + fy * fy > rod.radius * rod.radius) continue;
        for (std::size_t k = 0; k < d.nz; ++k) sum += hu.at(i, j, k);
        count += d.nz;
      }
    }
    if (count == 0) throw EmptyRegionError("rod " + std::to_string(r) + " contains no whole voxel");
    out.push_back({"rod" + std::to_string(r), sum / static_cast<double>(count), rod.density});
  }
  return out;
}

std::vector<NamedPose> CohortSpec::default_pose_set() {
  return {{"standing", {}},
          {"supine", {4.0, 0.0, 0.0, 0.0, 0.0, 3.0}},
          {"abduction", {0.0, 8.0, 0.0, 0.0, 0.0, 0.0}},
          {"adduction", {0.0, -8.0, 0.0, 0.0, 0.0, 0.0}}};
}

void CohortSpec::validate() const {
  if (n_cases < 1) throw RangeError("cohort needs at least one case");
  if (!std::isfinite(core_min) || !std::isfinite(core_max) || core_min < 0.0 || core_min > core_max) {
    throw RangeError("density range must satisfy 0 <= min <= max");
  }
  if (!(shell_ratio >= 0.0) || !std::isfinite(shell_ratio)) throw RangeError("shell ratio must be >= 0");
  if (!(size_jitter >= 0.0 && size_jitter < 0.5)) throw RangeError("size jitter must be in [0, 0.5)");
  if (!(shift_jitter_mm >= 0.0) || !(pose_jitter_deg >= 0.0) || !(pose_jitter_mm >= 0.0)) {
    throw RangeError("jitter must be >= 0");
  }
  if (pose_set.empty()) throw RangeError("pose set is empty");
  for (const auto& np : pose_set) {
    const auto a = np.pose.to_array();
    for (int i = 0; i < 6; ++i) {
      const double bound = i < 3 ? kMaxPoseAngleDeg : kMaxPoseShiftMm;
      const double jitter = i < 3 ? pose_jitter_deg : pose_jitter_mm;
      if (!std::isfinite(a[i]) || std::abs(a[i]) + jitter > bound) {
        throw RangeError("pose '" + np.name + "' can exceed +-10 deg / +-15 mm");
      }
    }
  }
  base.validate();
}

std::vector<PhantomSpec> cohort_specs(const CohortSpec& cohort) {
  cohort.validate();
  std::vector<PhantomSpec> specs;
  specs.reserve(cohort.n_cases);
  for (std::size_t i = 0; i < cohort.n_cases; ++i) {
    std::mt19937_64 rng(sub_seed(cohort.seed, "cohort-case", i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PhantomSpec s = cohort.base;
    s.core_density = cohort.core_min + (cohort.core_max - cohort.core_min) * unit(rng);
    s.shell_density = cohort.shell_ratio * s.core_density;
    const double scale = 1.0 + cohort.size_jitter * (2.0 * unit(rng) - 1.0);
    Vec3 shift;
    for (int a = 0; a < 3; ++a) shift[a] = cohort.shift_jitter_mm * (2.0 * unit(rng) - 1.0);
    auto& f = s.femur;
    f.head.radius *= scale;
    f.neck.radius *= scale;
    f.shaft.radius *= scale;
    f.head.center += shift;
    f.neck.a += shift;
    f.neck.b += shift;
    f.shaft.a += shift;
    f.shaft.b += shift;
    s.seed = sub_seed(cohort.seed, "hu-noise", i);
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<std::vector<NamedPose>> cohort_poses(const CohortSpec& cohort) {
  cohort.validate();
  std::vector<std::vector<NamedPose>> all;
  all.reserve(cohort.n_cases);
  for (std::size_t i = 0; i < cohort.n_cases; ++i) {
    std::mt19937_64 rng(sub_seed(cohort.seed, "cohort-pose", i));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<NamedPose> poses;
    for (const auto& np : cohort.pose_set) {
      auto a = np.pose.to_array();
      for (int k = 0; k < 6; ++k) a[k] += (k < 3 ? cohort.pose_jitter_deg : cohort.pose_jitter_mm) * unit(rng);
      poses.push_back({np.name, RigidTransform6::from_array(a)});
    }
    all.push_back(std::move(poses));
  }
  return all;
}

std::vector<SyntheticCase> generate_cohort(const CohortSpec& cohort) {
  const auto specs = cohort_specs(cohort);
  const auto poses = cohort_poses(cohort);
  std::vector<std::optional<SyntheticCase>> slots(specs.size());
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      auto c = generate_phantom(specs[u]);
      c.case_id = case_name(u);
      c.poses = poses[u];
      slots[u] = std::move(c);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SyntheticCase> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string case_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04zu", index);
  return buf;
}

}  // namespace bmdx
