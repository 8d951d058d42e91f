// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bmdx {

/// Settings for (mu/mu_w, lambda)-CMA-ES. Zero population/parents select the
/// standard defaults lambda = 4 + floor(3 ln n), mu = floor(lambda / 2).
struct CmaConfig {
  std::size_t population = 0;
  std::size_t parents = 0;
  /// Initial standard deviation per coordinate; a single value is broadcast.
  std::vector<double> sigma0{0.5};
  std::size_t max_evaluations = 10000;
  /// Stop once the largest coordinate standard deviation sigma * sqrt(max C_ii) drops below this.
  double tol_sigma = 1e-11;
  /// Stop once max f - min f over one generation drops below this.
  double tol_fun = 1e-12;
  std::uint64_t seed = 1;
  /// Evaluate the candidates of a generation on OpenMP threads. The objective must be thread-safe.
  bool parallel_evaluations = false;

  std::size_t resolved_population(std::size_t n) const;
  std::size_t resolved_parents(std::size_t n) const;
  /// Throws InvariantError for lambda < 2, mu < 1, mu > lambda, sigma0 <= 0, or a sigma0 size mismatch.
  void validate(std::size_t n) const;
};

enum class CmaStop { kMaxEvaluations, kTolSigma, kTolFun };

struct CmaGeneration {
  std::size_t evaluations = 0;
  double sigma = 0.0;
  double generation_best = 0.0;
  double best_so_far = 0.0;
  /// Smallest eigenvalue of the covariance matrix after this generation's update.
  double min_eigenvalue = 0.0;
  bool covariance_symmetric = true;
  std::vector<double> mean;
};

struct CmaResult {
  std::vector<double> x_best;
  double f_best = 0.0;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  CmaStop stop = CmaStop::kMaxEvaluations;
  std::vector<CmaGeneration> trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimises `objective` from `x0`. x0 itself is evaluated first and counts
/// toward the budget, so f_best <= f(x0). Non-finite objective values are
/// treated as +infinity. The run is a pure function of (objective, x0, config):
/// all random draws happen serially before a generation is evaluated.
CmaResult cma_es_minimize(const Objective& objective, std::span<const double> x0, const CmaConfig& config);

}  // namespace bmdx
