// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/error.hpp"

namespace bmdx {

ParseError::ParseError(std::string key, const std::string& detail)
    : Error(ErrorKind::kValidation, "'" + key + "': " + detail), key_(std::move(key)) {}

}  // namespace bmdx
