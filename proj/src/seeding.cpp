// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/seeding.hpp"

namespace bmdx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) { return splitmix64(seed ^ fnv1a(name)); }

std::uint64_t sub_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return splitmix64(sub_seed(seed, name) + index);
}

}  // namespace bmdx
