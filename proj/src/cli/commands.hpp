// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

#include "config.hpp"

namespace bmdx::cli {

// Each command returns an exit code; errors surface as bmdx::Error.
int run_synth(const RunConfig& cfg, std::ostream& log);
int run_calibrate(const RunConfig& cfg, std::ostream& log);
int run_project(const RunConfig& cfg, std::ostream& log);
int run_register(const RunConfig& cfg, std::ostream& log);
int run_tune_threshold(const RunConfig& cfg, std::ostream& log);
int run_fit_bmd(const RunConfig& cfg, std::ostream& log);
int run_predict(const RunConfig& cfg, std::ostream& log);
int run_evaluate(const RunConfig& cfg, std::ostream& log);
int run_losses_check(const RunConfig& cfg, std::ostream& log);

}  // namespace bmdx::cli
