// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels. Run with --benchmark_filter=... as usual.

#include <benchmark/benchmark.h>

#include <random>

#include "bmdx/bmd.hpp"
#include "bmdx/calibration.hpp"
#include "bmdx/parallel.hpp"
#include "bmdx/projection.hpp"
#include "bmdx/reference.hpp"

using namespace bmdx;

namespace {

Volume3D random_volume(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  std::vector<double> v(n * n * n);
  for (double& x : v) x = u(rng);
  const double s = 2.0;
  const double o = -0.5 * s * static_cast<double>(n - 1);
  return Volume3D(Grid3({n, n, n}, Vec3::Constant(s), Vec3::Constant(o)), VolumeUnit::kDensityMgCm3, std::move(v));
}

ProjectionGeometry pinhole() {
  ProjectionGeometry g;
  g.mode = ProjectionMode::kPinhole;
  g.detector_dims = {64, 64};
  g.detector_spacing = Vec2(3.2, 3.2);
  g.detector_center = Vec3(0, 300, 0);
  g.source = Vec3(0, -700, 0);
  g.step_mm = 2.0;
  return g;
}

const RigidTransform6 kPose{3, -2, 5, 1, -1, 2};

void BM_RenderSerial(benchmark::State& state) {
  const auto v = random_volume(64);
  const auto g = pinhole();
  for (auto _ : state) benchmark::DoNotOptimize(serial::render_drr(v, nullptr, g, kPose));
}

void BM_RenderParallel(benchmark::State& state) {
  const auto v = random_volume(64);
  const auto g = pinhole();
  ScopedThreadCount threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_drr(v, g, kPose));
}

Volume3D hu_volume() {
  const auto d = random_volume(96);
  return Volume3D(d.grid(), VolumeUnit::kHounsfield, std::vector<double>(d.values().begin(), d.values().end()));
}

const CalibrationLine kLine{0.8, -5.0, 0.0, 4};

void BM_CalibrateSerial(benchmark::State& state) {
  const auto hu = hu_volume();
  for (auto _ : state) benchmark::DoNotOptimize(serial::apply_calibration(hu, kLine));
}

void BM_CalibrateParallel(benchmark::State& state) {
  const auto hu = hu_volume();
  ScopedThreadCount threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_calibration(hu, kLine));
}

struct TuneInput {
  std::vector<Image2D> drrs;
  std::vector<double> gt;
  std::vector<double> grid;
};

TuneInput tune_input() {
  TuneInput t;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < 80; ++i) {
    std::vector<double> px(64 * 64);
    for (double& x : px) x = u(rng);
    t.drrs.emplace_back(Dims2{64, 64}, Vec2(1, 1), ImageUnit::kArealGCm2, std::move(px));
    t.gt.push_back(100.0 + 200.0 * u(rng));
  }
  t.grid = default_threshold_grid(t.drrs, 64);
  return t;
}

void BM_TuneSerial(benchmark::State& state) {
  const auto t = tune_input();
  for (auto _ : state) benchmark::DoNotOptimize(serial::tune_threshold(t.drrs, t.gt, t.grid));
}

void BM_TuneParallel(benchmark::State& state) {
  const auto t = tune_input();
  ScopedThreadCount threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tune_threshold(t.drrs, t.gt, t.grid));
}

}  // namespace

BENCHMARK(BM_RenderSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TuneSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TuneParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
