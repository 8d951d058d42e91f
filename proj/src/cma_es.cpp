// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/cma_es.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "bmdx/error.hpp"

namespace bmdx {

std::size_t CmaConfig::resolved_population(std::size_t n) const {
  if (population != 0) return population;
  return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

std::size_t CmaConfig::resolved_parents(std::size_t n) const {
  if (parents != 0) return parents;
  return resolved_population(n) / 2;
}

void CmaConfig::validate(std::size_t n) const {
  if (n < 1) throw InvariantError("CMA-ES needs at least one parameter");
  const auto lambda = resolved_population(n);
  const auto mu = resolved_parents(n);
  if (lambda < 2) throw InvariantError("CMA-ES population must be >= 2");
  if (mu < 1 || mu > lambda) throw InvariantError("CMA-ES parent count must be in [1, population]");
  if (sigma0.size() != 1 && sigma0.size() != n) throw InvariantError("sigma0 must hold 1 or n values");
  for (double s : sigma0) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvariantError("sigma0 must be > 0");
  }
  if (max_evaluations < 1) throw InvariantError("max_evaluations must be >= 1");
  if (!(tol_sigma >= 0.0) || !(tol_fun >= 0.0)) throw InvariantError("tolerances must be >= 0");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sanitize(double f) { return std::isfinite(f) ? f : std::numeric_limits<double>::infinity(); }

}  // namespace

CmaResult cma_es_minimize(const Objective& objective, std::span<const double> x0, const CmaConfig& config) {
  const std::size_t n = x0.size();
  config.validate(n);
  const auto lambda = config.resolved_population(n);
  const auto mu = config.resolved_parents(n);
  const auto nd = static_cast<double>(n);

  // Recombination weights and strategy constants (Hansen's tutorial defaults).
  VectorXd weights(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i) {
    weights[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();
  const double c_sigma = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
  const double d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / nd) / (nd + 4.0 + 2.0 * mu_eff / nd);
  const double c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nd + 2.0) * (nd + 2.0) + mu_eff));
  const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  const auto ni = static_cast<Eigen::Index>(n);
  VectorXd scales(ni);
  for (std::size_t i = 0; i < n; ++i) scales[static_cast<Eigen::Index>(i)] = config.sigma0.size() == 1 ? config.sigma0[0] : config.sigma0[i];
  double sigma = scales.maxCoeff();
  MatrixXd cov = (scales / sigma).array().square().matrix().asDiagonal();
  MatrixXd basis = MatrixXd::Identity(ni, ni);
  VectorXd axis_len = scales / sigma;  // sqrt of the eigenvalues of cov
  VectorXd mean = Eigen::Map<const VectorXd>(x0.data(), ni);
  VectorXd path_sigma = VectorXd::Zero(ni);
  VectorXd path_c = VectorXd::Zero(ni);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CmaResult result;
  result.x_best.assign(x0.begin(), x0.end());
  result.f_best = sanitize(objective(x0));
  result.evaluations = 1;

  std::vector<VectorXd> candidates(lambda, VectorXd(ni));
  std::vector<VectorXd> steps(lambda, VectorXd(ni));
  std::vector<double> fitness(lambda);
  std::vector<std::size_t> order(lambda);

  while (true) {
    if (result.evaluations + lambda > config.max_evaluations) {
      result.stop = CmaStop::kMaxEvaluations;
      break;
    }
    for (std::size_t k = 0; k < lambda; ++k) {
      VectorXd z(ni);
      for (Eigen::Index i = 0; i < ni; ++i) z[i] = gauss(rng);
      steps[k] = basis * axis_len.cwiseProduct(z);
      candidates[k] = mean + sigma * steps[k];
    }
    const auto lam = static_cast<std::ptrdiff_t>(lambda);
    if (config.parallel_evaluations) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t k = 0; k < lam; ++k) {
        fitness[k] = sanitize(objective(std::span<const double>(candidates[k].data(), n)));
      }
    } else {
      for (std::ptrdiff_t k = 0; k < lam; ++k) {
        fitness[k] = sanitize(objective(std::span<const double>(candidates[k].data(), n)));
      }
    }
    result.evaluations += lambda;
    ++result.generations;

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
    if (fitness[order[0]] < result.f_best) {
      result.f_best = fitness[order[0]];
      result.x_best.assign(candidates[order[0]].data(), candidates[order[0]].data() + n);
    }

    // Mean and evolution paths.
    VectorXd step_w = VectorXd::Zero(ni);
    for (std::size_t i = 0; i < mu; ++i) step_w += weights[static_cast<Eigen::Index>(i)] * steps[order[i]];
    mean += sigma * step_w;
    const VectorXd inv_sqrt_step = basis * (basis.transpose() * step_w).cwiseQuotient(axis_len);
    path_sigma = (1.0 - c_sigma) * path_sigma + std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * inv_sqrt_step;
    const double gen = static_cast<double>(result.generations);
    const double ps_norm = path_sigma.norm();
    const bool h_sigma =
        ps_norm / std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * gen)) < (1.4 + 2.0 / (nd + 1.0)) * chi_n;
    path_c = (1.0 - c_c) * path_c + (h_sigma ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * step_w;

    // Rank-one and rank-mu covariance update.
    MatrixXd rank_mu = MatrixXd::Zero(ni, ni);
    for (std::size_t i = 0; i < mu; ++i) {
      const auto& y = steps[order[i]];
      rank_mu.noalias() += weights[static_cast<Eigen::Index>(i)] * y * y.transpose();
    }
    const double delta_h = h_sigma ? 0.0 : c_c * (2.0 - c_c);
    cov = (1.0 - c_1 - c_mu) * cov + c_1 * (path_c * path_c.transpose() + delta_h * cov) + c_mu * rank_mu;
    cov = 0.5 * (cov + cov.transpose());

    sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    VectorXd eigenvalues = eig.eigenvalues();
    const double min_eig = eigenvalues.minCoeff();
    // Numerical floor; the trace records the value before flooring.
    eigenvalues = eigenvalues.cwiseMax(1e-300);
    basis = eig.eigenvectors();
    axis_len = eigenvalues.cwiseSqrt();

    CmaGeneration record;
    record.evaluations = result.evaluations;
    record.sigma = sigma;
    record.generation_best = fitness[order[0]];
    record.best_so_far = result.f_best;
    record.min_eigenvalue = min_eig;
    record.covariance_symmetric = (cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0;
    record.mean.assign(mean.data(), mean.data() + n);
    result.trace.push_back(std::move(record));

    const double spread = fitness[order[lambda - 1]] - fitness[order[0]];
    if (std::isfinite(spread) && spread < config.tol_fun) {
      result.stop = CmaStop::kTolFun;
      break;
    }
    if (sigma * std::sqrt(cov.diagonal().maxCoeff()) < config.tol_sigma) {
      result.stop = CmaStop::kTolSigma;
      break;
    }
  }
  return result;
}

}  // namespace bmdx
