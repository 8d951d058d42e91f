// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/parallel.hpp"

#include <omp.h>

#include "bmdx/error.hpp"

namespace bmdx {

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int threads) {
  if (threads < 1) throw InvariantError("thread count must be >= 1");
  omp_set_num_threads(threads);
}

}  // namespace bmdx
