// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bmdx/bmd.hpp"
#include "bmdx/cma_es.hpp"
#include "bmdx/imaging.hpp"

namespace bmdx::cli {

/// Flat `key = value` run configuration. Every key is optional except seed;
/// each subcommand checks the keys and paths it needs before writing anything.
struct RunConfig {
  std::filesystem::path config_path;
  std::uint64_t seed = 0;
  std::filesystem::path cohort_dir;
  std::filesystem::path output_dir;
  std::filesystem::path geometry_file;
  std::optional<int> threads;

  // synth
  std::size_t n_cases = 10;
  Dims3 dims{64, 64, 64};
  double spacing_mm = 2.0;
  double density_min = 100.0;
  double density_max = 300.0;
  double shell_ratio = 2.5;
  double noise_sigma_hu = 5.0;
  double size_jitter = 0.02;
  double shift_jitter_mm = 1.0;
  double pose_jitter_deg = 1.0;
  double pose_jitter_mm = 1.0;

  // register
  CmaConfig cma;
  double init_offset_deg = 0.0;
  double init_offset_mm = 0.0;

  // project
  std::string pose_source = "true";

  // tune-threshold / fit-bmd / predict / evaluate
  BmdTarget target = BmdTarget::kQCT;
  std::string tune_pose = "standing";
  std::size_t train_cases = 0;  // 0: every case
  std::size_t threshold_count = 64;
  std::vector<double> threshold_grid;  // explicit grid overrides threshold_count
  std::vector<double> dice_thresholds;

  // losses-check
  std::size_t losses_trials = 100;
  double losses_tolerance = 1e-4;

  bool has(const std::string& key) const;
  std::vector<std::string> keys_present;
};

/// Parses and type-checks every key. Unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace bmdx::cli
