// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "bmdx/bmd.hpp"
#include "bmdx/calibration.hpp"
#include "bmdx/error.hpp"
#include "bmdx/io.hpp"
#include "bmdx/losses.hpp"
#include "bmdx/metrics.hpp"
#include "bmdx/projection.hpp"
#include "bmdx/registration.hpp"
#include "bmdx/seeding.hpp"
#include "bmdx/synth.hpp"
#include "bmdx/text_format.hpp"

namespace bmdx::cli {

namespace fs = std::filesystem;

namespace {

void require_key(const RunConfig& cfg, const std::string& key) {
  if (!cfg.has(key)) throw ParseError(key, "required by this subcommand");
}

void require_dir(const RunConfig& cfg, const std::string& key, const fs::path& dir) {
  require_key(cfg, key);
  if (!fs::is_directory(dir)) throw ParseError(key, "directory not found: " + dir.string());
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ParseError(path.string(), "input file not found");
}

ProjectionGeometry load_geometry(const RunConfig& cfg) {
  require_key(cfg, "geometry_file");
  require_file(cfg.geometry_file);
  return read_geometry(cfg.geometry_file);
}

std::vector<std::string> list_cases(const fs::path& cohort) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(cohort)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("case_", 0) == 0) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw DegenerateInputError("no case_* directories in " + cohort.string());
  return ids;
}

// Runs body(i) for every case on OpenMP threads and rethrows the first failure in case order.
template <typename Body>
void for_each_case(std::size_t n, const Body& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const std::vector<std::string> kPoseColumns{"rx", "ry", "rz", "tx", "ty", "tz"};

std::string poses_csv(std::span<const NamedPose> poses, const std::vector<double>* gc) {
  CsvTable t;
  t.header = {"pose"};
  t.header.insert(t.header.end(), kPoseColumns.begin(), kPoseColumns.end());
  if (gc != nullptr) t.header.push_back("gc");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    std::vector<std::string> row{poses[i].name};
    for (double v : poses[i].pose.to_array()) row.push_back(format_double(v));
    if (gc != nullptr) row.push_back(format_double((*gc)[i]));
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

std::vector<NamedPose> read_poses(const fs::path& path) {
  const auto t = CsvTable::load(path);
  const auto c_pose = t.column("pose");
  std::vector<std::size_t> cols;
  for (const auto& name : kPoseColumns) cols.push_back(t.column(name));
  std::vector<NamedPose> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    std::array<double, 6> a{};
    for (int k = 0; k < 6; ++k) a[k] = parse_double(row[cols[k]], kPoseColumns[k]);
    if (!seen.insert(row[c_pose]).second) throw ParseError("pose", "duplicate pose '" + row[c_pose] + "'");
    out.push_back({row[c_pose], RigidTransform6::from_array(a).canonical()});
  }
  if (out.empty()) throw ParseError(path.string(), "no poses");
  return out;
}

struct Truth {
  double vbmd = 0.0;
  double abmd = 0.0;
};

Truth read_truth(const fs::path& path) {
  const auto t = CsvTable::load(path);
  if (t.rows.size() != 1) throw ParseError(path.string(), "expected exactly one truth row");
  return {parse_double(t.rows[0][t.column("true_vbmd_mg_cm3")], "true_vbmd_mg_cm3"),
          parse_double(t.rows[0][t.column("true_abmd_g_cm2")], "true_abmd_g_cm2")};
}

double target_value(const Truth& truth, BmdTarget target) { return target == BmdTarget::kQCT ? truth.vbmd : truth.abmd; }

double mean_positive(const Image2D& image) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : image.values()) {
    if (v > 0.0) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) throw EmptyRegionError("areal truth map has no bone pixel");
  return sum / static_cast<double>(n);
}

std::vector<std::string> training_cases(const RunConfig& cfg, const std::vector<std::string>& ids) {
  const std::size_t n = cfg.train_cases == 0 ? ids.size() : cfg.train_cases;
  if (n > ids.size()) throw ParseError("train_cases", "exceeds the number of cases (" + std::to_string(ids.size()) + ")");
  return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n)};
}

fs::path pfdrr_path(const RunConfig& cfg, const std::string& id, const std::string& pose) {
  return cfg.output_dir / id / ("pfdrr_" + pose + ".i2h");
}

struct TrainingSet {
  std::vector<Image2D> drrs;
  std::vector<double> gt;
};

TrainingSet load_training(const RunConfig& cfg, const std::vector<std::string>& ids) {
  for (const auto& id : ids) {
    require_file(pfdrr_path(cfg, id, cfg.tune_pose));
    require_file(cfg.cohort_dir / id / "truth.csv");
  }
  TrainingSet set;
  for (const auto& id : ids) {
    set.drrs.push_back(read_image(pfdrr_path(cfg, id, cfg.tune_pose)));
    set.gt.push_back(target_value(read_truth(cfg.cohort_dir / id / "truth.csv"), cfg.target));
  }
  return set;
}

PhantomSpec base_phantom(const RunConfig& cfg) {
  PhantomSpec spec;
  spec.dims = cfg.dims;
  spec.spacing_mm = cfg.spacing_mm;
  spec.noise_sigma_hu = cfg.noise_sigma_hu;
  return spec;
}

}  // namespace

int run_synth(const RunConfig& cfg, std::ostream& log) {
  require_key(cfg, "cohort_dir");
  const auto geometry = load_geometry(cfg);
  CohortSpec cohort;
  cohort.n_cases = cfg.n_cases;
  cohort.base = base_phantom(cfg);
  cohort.core_min = cfg.density_min;
  cohort.core_max = cfg.density_max;
  cohort.shell_ratio = cfg.shell_ratio;
  cohort.size_jitter = cfg.size_jitter;
  cohort.shift_jitter_mm = cfg.shift_jitter_mm;
  cohort.pose_jitter_deg = cfg.pose_jitter_deg;
  cohort.pose_jitter_mm = cfg.pose_jitter_mm;
  cohort.seed = sub_seed(cfg.seed, "synth");
  const auto specs = cohort_specs(cohort);
  const auto poses = cohort_poses(cohort);

  fs::create_directories(cfg.cohort_dir);
  for_each_case(specs.size(), [&](std::size_t i) {
    auto c = generate_phantom(specs[i]);
    const auto dir = cfg.cohort_dir / case_name(i);
    fs::create_directories(dir);
    write_volume(c.hu, dir / "volume.v3h");
    write_volume(c.density, dir / "density.v3h");
    write_mask3d(c.bone_mask, dir / "mask_bone.v3h");
    write_mask3d(c.pf_mask, dir / "mask_pf.v3h");
    write_file_atomic(dir / "poses.csv", poses_csv(poses[i], nullptr));
    write_rod_table(c.rods, dir / "rods.csv");
    double abmd = 0.0;
    for (std::size_t p = 0; p < poses[i].size(); ++p) {
      const auto& np = poses[i][p];
      write_image(render_drr(c.density, geometry, np.pose), dir / ("xray_" + np.name + ".i2h"));
      const auto areal = analytic_areal_map(specs[i], geometry, np.pose);
      if (p == 0) abmd = mean_positive(areal);
      write_image(areal, dir / ("areal_" + np.name + ".i2h"));
    }
    CsvTable truth;
    truth.header = {"case_id", "true_vbmd_mg_cm3", "true_abmd_g_cm2", "core_density_mg_cm3", "shell_density_mg_cm3"};
    truth.rows.push_back({case_name(i), format_double(c.true_vbmd), format_double(abmd),
                          format_double(specs[i].core_density), format_double(specs[i].shell_density)});
    write_file_atomic(dir / "truth.csv", truth.to_string());
  });
  log << "synth: wrote " << specs.size() << " cases to " << cfg.cohort_dir.string() << "\n";
  return 0;
}

int run_calibrate(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_key(cfg, "output_dir");
  const auto ids = list_cases(cfg.cohort_dir);
  for (const auto& id : ids) {
    require_file(cfg.cohort_dir / id / "rods.csv");
    require_file(cfg.cohort_dir / id / "volume.v3h");
  }
  for_each_case(ids.size(), [&](std::size_t i) {
    const auto in = cfg.cohort_dir / ids[i];
    const auto out = cfg.output_dir / ids[i];
    const auto line = fit_calibration(read_rod_table(in / "rods.csv"));
    const auto qct = apply_calibration(read_volume(in / "volume.v3h"), line);
    fs::create_directories(out);
    write_calibration_line(line, out / "calibration.txt");
    write_volume(qct, out / "qct.v3h");
  });
  log << "calibrate: " << ids.size() << " cases\n";
  return 0;
}

int run_register(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto geometry = load_geometry(cfg);
  const auto ids = list_cases(cfg.cohort_dir);
  std::vector<std::vector<NamedPose>> all_poses;
  for (const auto& id : ids) {
    require_file(cfg.output_dir / id / "qct.v3h");
    all_poses.push_back(read_poses(cfg.cohort_dir / id / "poses.csv"));
    for (const auto& np : all_poses.back()) require_file(cfg.cohort_dir / id / ("xray_" + np.name + ".i2h"));
  }
  std::vector<std::size_t> failures(ids.size(), 0);
  for_each_case(ids.size(), [&](std::size_t i) {
    const auto qct = read_volume(cfg.output_dir / ids[i] / "qct.v3h");
    std::vector<NamedPose> found;
    std::vector<double> gc;
    for (std::size_t p = 0; p < all_poses[i].size(); ++p) {
      const auto& np = all_poses[i][p];
      const auto xray = read_image(cfg.cohort_dir / ids[i] / ("xray_" + np.name + ".i2h"));
      const std::uint64_t stream = i * 64 + p;
      std::mt19937_64 rng(sub_seed(cfg.seed, "register-init", stream));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      auto a = np.pose.to_array();
      for (int k = 0; k < 6; ++k) a[k] += (k < 3 ? cfg.init_offset_deg : cfg.init_offset_mm) * unit(rng);
      CmaConfig cma = cfg.cma;
      cma.seed = sub_seed(cfg.seed, "register-cma", stream);
      const auto result = register_2d3d(xray, qct, nullptr, geometry, RigidTransform6::from_array(a), cma);
      found.push_back({np.name, result.pose});
      gc.push_back(result.gc);
    }
    write_file_atomic(cfg.output_dir / ids[i] / "registered_poses.csv", poses_csv(found, &gc));
  });
  log << "register: " << ids.size() << " cases\n";
  return 0;
}

int run_project(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto geometry = load_geometry(cfg);
  const auto ids = list_cases(cfg.cohort_dir);
  const auto pose_file = [&](const std::string& id) {
    return cfg.pose_source == "true" ? cfg.cohort_dir / id / "poses.csv" : cfg.output_dir / id / "registered_poses.csv";
  };
  for (const auto& id : ids) {
    require_file(cfg.output_dir / id / "qct.v3h");
    require_file(cfg.cohort_dir / id / "mask_pf.v3h");
    require_file(cfg.cohort_dir / id / "mask_bone.v3h");
    require_file(pose_file(id));
  }
  for_each_case(ids.size(), [&](std::size_t i) {
    const auto qct = read_volume(cfg.output_dir / ids[i] / "qct.v3h");
    const auto pf = read_mask3d(cfg.cohort_dir / ids[i] / "mask_pf.v3h");
    const auto bone = read_mask3d(cfg.cohort_dir / ids[i] / "mask_bone.v3h");
    for (const auto& np : read_poses(pose_file(ids[i]))) {
      write_image(render_drr(qct, &pf, geometry, np.pose), cfg.output_dir / ids[i] / ("pfdrr_" + np.name + ".i2h"));
      write_image(render_drr(qct, &bone, geometry, np.pose), cfg.output_dir / ids[i] / ("bonedrr_" + np.name + ".i2h"));
    }
  });
  log << "project: " << ids.size() << " cases (" << cfg.pose_source << " poses)\n";
  return 0;
}

int run_tune_threshold(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto ids = training_cases(cfg, list_cases(cfg.cohort_dir));
  const auto set = load_training(cfg, ids);
  const auto grid = cfg.threshold_grid.empty() ? default_threshold_grid(set.drrs, cfg.threshold_count) : cfg.threshold_grid;
  const auto tuning = tune_threshold(set.drrs, set.gt, grid);
  CsvTable curve;
  curve.header = {"threshold", "pcc", "valid"};
  for (const auto& p : tuning.curve) {
    curve.rows.push_back({format_double(p.threshold), p.valid ? format_double(p.pcc) : "nan", p.valid ? "1" : "0"});
  }
  write_file_atomic(cfg.output_dir / "threshold_curve.csv", curve.to_string());
  write_file_atomic(cfg.output_dir / "threshold_tuning.txt",
                    "target = " + std::string(to_string(cfg.target)) + "\nthreshold = " +
                        format_double(tuning.best_threshold) + "\npcc = " + format_double(tuning.best_pcc) + "\n");
  log << "tune-threshold: best threshold " << format_double(tuning.best_threshold) << " (PCC "
      << format_double(tuning.best_pcc) << ") over " << ids.size() << " cases\n";
  return 0;
}

int run_fit_bmd(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto tuning_path = cfg.output_dir / "threshold_tuning.txt";
  require_file(tuning_path);
  const auto tuning = KeyValueText::load(tuning_path, '=');
  const double threshold = tuning.get_double("threshold");
  if (parse_bmd_target(tuning.get("target")) != cfg.target) {
    throw ParseError("target", "threshold was tuned for a different target");
  }
  const auto ids = training_cases(cfg, list_cases(cfg.cohort_dir));
  const auto set = load_training(cfg, ids);
  std::vector<double> means;
  for (const auto& d : set.drrs) means.push_back(drr_mean_intensity(d, threshold).mean);
  const auto cal = fit_bmd_line(means, set.gt, threshold, cfg.target);
  write_bmd_calibration(cal, cfg.output_dir / "bmd_calibration.txt");
  log << "fit-bmd: slope " << format_double(cal.slope) << " intercept " << format_double(cal.intercept) << "\n";
  return 0;
}

int run_predict(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "cohort_dir", cfg.cohort_dir);
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto cal_path = cfg.output_dir / "bmd_calibration.txt";
  require_file(cal_path);
  const auto cal = read_bmd_calibration(cal_path);
  if (cal.target != cfg.target) throw ParseError("target", "BMD calibration was fitted for a different target");
  const auto ids = list_cases(cfg.cohort_dir);
  std::vector<std::vector<NamedPose>> poses;
  for (const auto& id : ids) {
    poses.push_back(read_poses(cfg.cohort_dir / id / "poses.csv"));
    require_file(cfg.cohort_dir / id / "truth.csv");
    for (const auto& np : poses.back()) require_file(pfdrr_path(cfg, id, np.name));
  }
  std::vector<BmdTableRow> rows;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double gt = target_value(read_truth(cfg.cohort_dir / ids[i] / "truth.csv"), cfg.target);
    for (const auto& np : poses[i]) {
      const auto drr = read_image(pfdrr_path(cfg, ids[i], np.name));
      const double mean = drr_mean_intensity(drr, cal.threshold).mean;
      rows.push_back({ids[i], np.name, mean, cal.slope * mean + cal.intercept, gt});
    }
  }
  write_bmd_table(rows, cfg.output_dir / "bmd_table.csv");
  log << "predict: " << rows.size() << " rows\n";
  return 0;
}

int run_evaluate(const RunConfig& cfg, std::ostream& log) {
  require_dir(cfg, "output_dir", cfg.output_dir);
  const auto table_path = cfg.output_dir / "bmd_table.csv";
  require_file(table_path);
  const auto rows = read_bmd_table(table_path);
  std::vector<std::string> ids;
  for (const auto& r : rows) {
    if (std::find(ids.begin(), ids.end(), r.case_id) == ids.end()) ids.push_back(r.case_id);
  }
  std::sort(ids.begin(), ids.end());
  // Held-out cases follow the training cases; with no split every case is evaluated.
  std::set<std::string> held_out;
  const std::size_t first = cfg.train_cases > 0 && cfg.train_cases < ids.size() ? cfg.train_cases : 0;
  if (cfg.train_cases > ids.size()) throw ParseError("train_cases", "exceeds the number of cases");
  for (std::size_t i = first; i < ids.size(); ++i) held_out.insert(ids[i]);

  std::vector<PairedRecord> primary;
  std::vector<PairedRecord> all_poses;
  for (const auto& r : rows) {
    if (!held_out.count(r.case_id)) continue;
    all_poses.push_back({r.case_id, r.pose, r.pred_bmd, r.gt_bmd});
    if (r.pose == cfg.tune_pose) primary.push_back({r.case_id, r.pose, r.pred_bmd, r.gt_bmd});
  }
  if (primary.empty()) throw DegenerateInputError("no rows for pose '" + cfg.tune_pose + "' among evaluated cases");
  const PairedSeries primary_series(primary);
  const PairedSeries pose_series(all_poses);
  const auto reg = regression_metrics(primary_series);
  std::vector<MetricRow> metrics{{"n_cases", static_cast<double>(primary.size())},
                                 {"pcc", reg.pcc},
                                 {"mae", reg.mae},
                                 {"see", reg.see},
                                 {"icc", icc(primary_series)}};
  std::set<std::string> pose_names;
  for (const auto& r : all_poses) pose_names.insert(r.pose);
  if (pose_names.size() >= 2) metrics.push_back({"rms_cv_percent", rms_cv_percent(pose_series)});
  const auto ba = bland_altman(pose_series);
  metrics.push_back({"ba_mean_diff", ba.mean_diff});
  metrics.push_back({"ba_sd_diff", ba.sd_diff});
  metrics.push_back({"ba_lower", ba.lower});
  metrics.push_back({"ba_upper", ba.upper});
  metrics.push_back({"ba_case_outliers", static_cast<double>(ba.case_outliers.size())});

  // PF-DRR against the analytic areal map, where both are on disk.
  if (cfg.has("cohort_dir")) {
    double psnr_sum = 0.0;
    double dice_sum = 0.0;
    std::size_t n = 0;
    for (const auto& id : held_out) {
      const auto pred = pfdrr_path(cfg, id, cfg.tune_pose);
      const auto truth = cfg.cohort_dir / id / ("areal_" + cfg.tune_pose + ".i2h");
      if (!fs::is_regular_file(pred) || !fs::is_regular_file(truth)) continue;
      const auto gt_img = read_image(truth);
      const auto pred_img = read_image(pred);
      const auto thresholds = cfg.dice_thresholds.empty() ? default_dice_thresholds(gt_img) : cfg.dice_thresholds;
      const auto dm = decomposition_metrics(gt_img, pred_img, thresholds);
      psnr_sum += dm.psnr;
      dice_sum += dm.mean_dice;
      ++n;
    }
    if (n > 0) {
      metrics.push_back({"decomposition_psnr", psnr_sum / static_cast<double>(n)});
      metrics.push_back({"decomposition_dice", dice_sum / static_cast<double>(n)});
    }
  }
  write_metrics_csv(metrics, cfg.output_dir / "metrics.csv");
  write_bland_altman_csv(pose_series, ba, cfg.output_dir / "bland_altman.csv");
  log << "evaluate: PCC " << format_double(reg.pcc) << ", MAE " << format_double(reg.mae) << " over "
      << primary.size() << " cases\n";
  return 0;
}

int run_losses_check(const RunConfig& cfg, std::ostream& log) {
  require_key(cfg, "output_dir");
  GradientCheckConfig check;
  check.trials = cfg.losses_trials;
  check.tolerance = cfg.losses_tolerance;
  check.seed = sub_seed(cfg.seed, "losses-check");
  const auto results = check_loss_gradients(check);
  CsvTable t;
  t.header = {"kernel", "trials", "max_rel_error", "tolerance", "status"};
  bool ok = true;
  for (const auto& r : results) {
    t.rows.push_back({r.kernel, std::to_string(r.trials), format_double(r.max_rel_error), format_double(r.tolerance),
                      r.passed ? "pass" : "fail"});
    ok = ok && r.passed;
    log << "losses-check: " << r.kernel << " " << (r.passed ? "pass" : "FAIL") << " (max rel error "
        << format_double(r.max_rel_error) << ")\n";
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "losses_check.csv", t.to_string());
  return ok ? 0 : 3;
}

}  // namespace bmdx::cli
