// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace bmdx {

/// Number of OpenMP threads used by the parallel kernels. Results never depend on it.
int thread_count();
void set_thread_count(int threads);

/// Restores the previous thread count on scope exit.
class ScopedThreadCount {
 public:
  explicit ScopedThreadCount(int threads) : previous_(thread_count()) { set_thread_count(threads); }
  ~ScopedThreadCount() { set_thread_count(previous_); }
  ScopedThreadCount(const ScopedThreadCount&) = delete;
  ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

 private:
  int previous_;
};

}  // namespace bmdx
