// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bmdx/error.hpp"
#include "bmdx/registration.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "seed", "cohort_dir", "output_dir", "geometry_file", "threads",
      "n_cases", "dims", "spacing_mm", "density_min", "density_max", "shell_ratio", "noise_sigma_hu",
      "size_jitter", "shift_jitter_mm", "pose_jitter_deg", "pose_jitter_mm",
      "cma_population", "cma_parents", "cma_sigma0", "cma_max_evaluations", "cma_tol_sigma", "cma_tol_fun",
      "cma_parallel", "init_offset_deg", "init_offset_mm",
      "pose_source", "target", "tune_pose", "train_cases", "threshold_count", "threshold_grid",
      "dice_thresholds", "losses_trials", "losses_tolerance"};
  return keys;
}

std::size_t get_count(const KeyValueText& kv, const std::string& key, long long min_value) {
  const long long v = kv.get_int(key);
  if (v < min_value) throw ParseError(key, "must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

double get_nonneg(const KeyValueText& kv, const std::string& key) {
  const double v = kv.get_double(key);
  if (!std::isfinite(v) || v < 0.0) throw ParseError(key, "must be finite and >= 0");
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

bool RunConfig::has(const std::string& key) const {
  return std::find(keys_present.begin(), keys_present.end(), key) != keys_present.end();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto kv = KeyValueText::load(path, '=');
  RunConfig c;
  c.config_path = path;
  for (const auto& [key, value] : kv.entries()) {
    if (!known_keys().count(key)) throw ParseError(key, "unknown config key");
    c.keys_present.push_back(key);
  }
  if (!kv.has("seed")) throw ParseError("seed", "missing required key");
  {
    const auto& text = kv.get("seed");
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("seed", "must be a non-negative integer");
    }
    try {
      c.seed = std::stoull(text);
    } catch (const std::exception&) {
      throw ParseError("seed", "out of range");
    }
  }
  // Relative paths are taken relative to the config file.
  const auto base = path.parent_path();
  if (kv.has("cohort_dir")) c.cohort_dir = resolve(base, kv.get("cohort_dir"));
  if (kv.has("output_dir")) c.output_dir = resolve(base, kv.get("output_dir"));
  if (kv.has("geometry_file")) c.geometry_file = resolve(base, kv.get("geometry_file"));
  if (kv.has("threads")) c.threads = static_cast<int>(get_count(kv, "threads", 1));

  if (kv.has("n_cases")) c.n_cases = get_count(kv, "n_cases", 1);
  if (kv.has("dims")) {
    const auto d = kv.get_ints("dims", 3);
    for (long long v : d) {
      if (v < 2) throw ParseError("dims", "each dimension must be >= 2");
    }
    c.dims = {static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]), static_cast<std::size_t>(d[2])};
  }
  if (kv.has("spacing_mm")) {
    c.spacing_mm = kv.get_double("spacing_mm");
    if (!(c.spacing_mm > 0.0) || !std::isfinite(c.spacing_mm)) throw ParseError("spacing_mm", "must be > 0");
  }
  if (kv.has("density_min")) c.density_min = get_nonneg(kv, "density_min");
  if (kv.has("density_max")) c.density_max = get_nonneg(kv, "density_max");
  if (c.density_min > c.density_max) throw ParseError("density_max", "must be >= density_min");
  if (kv.has("shell_ratio")) c.shell_ratio = get_nonneg(kv, "shell_ratio");
  if (kv.has("noise_sigma_hu")) c.noise_sigma_hu = get_nonneg(kv, "noise_sigma_hu");
  if (kv.has("size_jitter")) c.size_jitter = get_nonneg(kv, "size_jitter");
  if (kv.has("shift_jitter_mm")) c.shift_jitter_mm = get_nonneg(kv, "shift_jitter_mm");
  if (kv.has("pose_jitter_deg")) c.pose_jitter_deg = get_nonneg(kv, "pose_jitter_deg");
  if (kv.has("pose_jitter_mm")) c.pose_jitter_mm = get_nonneg(kv, "pose_jitter_mm");

  c.cma = default_registration_config();
  if (kv.has("cma_population")) c.cma.population = get_count(kv, "cma_population", 2);
  if (kv.has("cma_parents")) c.cma.parents = get_count(kv, "cma_parents", 1);
  if (kv.has("cma_sigma0")) c.cma.sigma0 = kv.get_doubles("cma_sigma0", 6);
  if (kv.has("cma_max_evaluations")) c.cma.max_evaluations = get_count(kv, "cma_max_evaluations", 1);
  if (kv.has("cma_tol_sigma")) c.cma.tol_sigma = get_nonneg(kv, "cma_tol_sigma");
  if (kv.has("cma_tol_fun")) c.cma.tol_fun = get_nonneg(kv, "cma_tol_fun");
  if (kv.has("cma_parallel")) {
    const auto& v = kv.get("cma_parallel");
    if (v != "true" && v != "false") throw ParseError("cma_parallel", "expected true or false");
    c.cma.parallel_evaluations = v == "true";
  }
  try {
    c.cma.validate(6);
  } catch (const InvariantError& e) {
    throw ParseError("cma_*", e.what());
  }
  if (kv.has("init_offset_deg")) c.init_offset_deg = get_nonneg(kv, "init_offset_deg");
  if (kv.has("init_offset_mm")) c.init_offset_mm = get_nonneg(kv, "init_offset_mm");

  if (kv.has("pose_source")) {
    c.pose_source = kv.get("pose_source");
    if (c.pose_source != "true" && c.pose_source != "registered") {
      throw ParseError("pose_source", "expected true or registered");
    }
  }
  if (kv.has("target")) c.target = parse_bmd_target(kv.get("target"));
  if (kv.has("tune_pose")) c.tune_pose = kv.get("tune_pose");
  if (kv.has("train_cases")) c.train_cases = get_count(kv, "train_cases", 0);
  if (kv.has("threshold_count")) c.threshold_count = get_count(kv, "threshold_count", 1);
  if (kv.has("threshold_grid")) {
    c.threshold_grid = kv.get_double_list("threshold_grid");
    if (c.threshold_grid.empty()) throw ParseError("threshold_grid", "must list at least one threshold");
    for (double t : c.threshold_grid) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw ParseError("threshold_grid", "thresholds must be >= 0");
    }
  }
  if (kv.has("dice_thresholds")) {
    c.dice_thresholds = kv.get_double_list("dice_thresholds");
    for (double t : c.dice_thresholds) {
      if (!std::isfinite(t)) throw ParseError("dice_thresholds", "thresholds must be finite");
    }
  }
  if (kv.has("losses_trials")) c.losses_trials = get_count(kv, "losses_trials", 1);
  if (kv.has("losses_tolerance")) {
    c.losses_tolerance = kv.get_double("losses_tolerance");
    if (!(c.losses_tolerance > 0.0)) throw ParseError("losses_tolerance", "must be > 0");
  }
  return c;
}

}  // namespace bmdx::cli
