// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace bmdx {

/// Named sub-seed: splitmix64(seed ^ fnv1a(name)). Every random stream in a
/// run is derived from the single run seed this way.
std::uint64_t sub_seed(std::uint64_t seed, std::string_view name);
std::uint64_t sub_seed(std::uint64_t seed, std::string_view name, std::uint64_t index);

}  // namespace bmdx
