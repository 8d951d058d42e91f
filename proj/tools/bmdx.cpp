// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/cli.hpp"

int main(int argc, char** argv) { return bmdx::cli::dispatch(argc, argv); }
