// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmdx::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Runs `bmdx <subcommand> --config FILE`. args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace bmdx::cli
