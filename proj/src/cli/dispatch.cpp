// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include "bmdx/error.hpp"
#include "bmdx/parallel.hpp"
#include "commands.hpp"

namespace bmdx::cli {

namespace {

struct Subcommand {
  const char* name;
  const char* help;
  int (*run)(const RunConfig&, std::ostream&);
};

const Subcommand kSubcommands[] = {
    {"synth", "Generate a synthetic phantom cohort into cohort_dir", run_synth},
    {"calibrate", "Fit HU->density lines on the rods and write calibrated QCT volumes", run_calibrate},
    {"project", "Render PF and whole-bone DRRs at the true or registered poses", run_project},
    {"register", "Register each X-ray to its QCT volume (GC + CMA-ES)", run_register},
    {"tune-threshold", "Search the PF-DRR threshold maximising PCC on the training cases", run_tune_threshold},
    {"fit-bmd", "Fit the linear BMD model at the tuned threshold", run_fit_bmd},
    {"predict", "Predict BMD for every case and pose", run_predict},
    {"evaluate", "Write the metric table and Bland-Altman analysis", run_evaluate},
    {"losses-check", "Finite-difference check of the loss-kernel gradients", run_losses_check},
};

const char* kConfigHelp =
    "Run configuration (key = value). Keys: seed (required), cohort_dir, output_dir, geometry_file, threads, "
    "n_cases, dims, spacing_mm, density_min, density_max, shell_ratio, noise_sigma_hu, size_jitter, "
    "shift_jitter_mm, pose_jitter_deg, pose_jitter_mm, cma_population, cma_parents, cma_sigma0, "
    "cma_max_evaluations, cma_tol_sigma, cma_tol_fun, cma_parallel, init_offset_deg, init_offset_mm, "
    "pose_source, target, tune_pose, train_cases, threshold_count, threshold_grid, dice_thresholds, "
    "losses_trials, losses_tolerance";

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::kNumerical ? kNumericalError : kDataError; }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bmdx: X-ray BMD estimation pipeline on CT-derived DRRs", "bmdx"};
  app.require_subcommand(1);
  std::string config_path;
  const Subcommand* chosen = nullptr;
  for (const auto& sub : kSubcommands) {
    auto* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config,-c", config_path, kConfigHelp)->required();
    cmd->callback([&chosen, &sub] { chosen = &sub; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "bmdx: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  if (chosen == nullptr) {
    err << app.help();
    return kUsage;
  }

  try {
    const auto cfg = load_run_config(config_path);
    std::optional<ScopedThreadCount> threads;
    if (cfg.threads) threads.emplace(*cfg.threads);
    return chosen->run(cfg, out);
  } catch (const Error& e) {
    err << "bmdx " << chosen->name << ": error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "bmdx " << chosen->name << ": error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "bmdx " << chosen->name << ": internal error: " << e.what() << "\n";
    return kNumericalError;
  }
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace bmdx::cli
